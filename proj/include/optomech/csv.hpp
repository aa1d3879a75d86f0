#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "optomech/experiment.hpp"
#include "optomech/fitting.hpp"
#include "optomech/spectra.hpp"

namespace optomech {

// Writes to a sibling temp file and renames into place, so readers never see
// a partial file and failures leave nothing behind.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// All CSV files carry a '#' header block (schema_version, kind, a mandatory
// units line, kind-specific metadata), one column-name row, then data rows
// in shortest round-trip decimal. Readers are strict: wrong kind, wrong or
// missing units, unknown columns, ragged rows, and malformed numbers all
// raise CsvError with the offending line.

void write_spectrum(const std::filesystem::path& path, const SpectrumTrace& trace);
// expect: require this unit tag (e.g. a displacement-only pipeline); the
// stored psd unit decides the trace's tag either way.
SpectrumTrace read_spectrum(const std::filesystem::path& path,
                            std::optional<SpectrumUnit> expect = std::nullopt);

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep);
SweepResult read_sweep(const std::filesystem::path& path);

void write_cooling(const std::filesystem::path& path, const CoolingResult& cooling);
CoolingResult read_cooling(const std::filesystem::path& path);

void write_calibration(const std::filesystem::path& path,
                       std::span<const CalibrationPoint> points);
std::vector<CalibrationPoint> read_calibration(const std::filesystem::path& path);

}  // namespace optomech
