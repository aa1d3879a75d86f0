#include "optomech/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/numfmt.hpp"

namespace optomech {

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CsvError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw CsvError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw CsvError("rename failed for: " + path.string());
  }
}

namespace {

[[noreturn]] void fail_line(int line, const std::string& what) {
  throw CsvError("line " + std::to_string(line) + ": " + what);
}

struct Column {
  const char* name;
  const char* unit;
};

struct CsvDoc {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::string> units;  // parallel to columns, from the units line
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    if (p == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, p - start));
    start = p + 1;
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

CsvDoc read_doc(const std::filesystem::path& path, const char* kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot read: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  CsvDoc doc;
  int line_no = 0;
  bool header_done = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (nl == std::string::npos ? text.size() : nl) - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    line = strip_cr(line);
    ++line_no;
    if (line.empty()) continue;

    if (line[0] == '#') {
      if (header_done) fail_line(line_no, "metadata after data rows");
      std::string_view body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.remove_prefix(1);
      const std::size_t colon = body.find(": ");
      if (colon == std::string_view::npos)
        fail_line(line_no, "expected '# key: value' metadata");
      doc.meta.emplace(std::string(body.substr(0, colon)),
                       std::string(body.substr(colon + 2)));
      continue;
    }
    if (doc.columns.empty()) {
      doc.columns = split(line, ',');
      header_done = true;
      continue;
    }
    doc.rows.push_back(split(line, ','));
    doc.row_lines.push_back(line_no);
  }

  if (doc.columns.empty()) throw CsvError(path.string() + ": no column header row");
  const auto sv = doc.meta.find("schema_version");
  if (sv == doc.meta.end()) throw CsvError(path.string() + ": missing schema_version");
  if (sv->second != "1")
    throw CsvError(path.string() + ": unsupported schema_version " + sv->second);
  const auto k = doc.meta.find("kind");
  if (k == doc.meta.end()) throw CsvError(path.string() + ": missing kind");
  if (k->second != kind)
    throw CsvError(path.string() + ": kind is '" + k->second + "', expected '" + kind + "'");

  const auto u = doc.meta.find("units");
  if (u == doc.meta.end()) throw CsvError(path.string() + ": missing units line");
  for (const auto& tok : split(u->second, ' ')) {
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw CsvError(path.string() + ": malformed units token '" + tok + "'");
    doc.units.push_back(tok.substr(eq + 1));
    const std::string col = tok.substr(0, eq);
    const std::size_t idx = doc.units.size() - 1;
    if (idx >= doc.columns.size() || doc.columns[idx] != col)
      throw CsvError(path.string() + ": units line does not match columns at '" + col + "'");
  }
  if (doc.units.size() != doc.columns.size())
    throw CsvError(path.string() + ": units line covers " + std::to_string(doc.units.size()) +
                   " of " + std::to_string(doc.columns.size()) + " columns");

  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    if (doc.rows[r].size() != doc.columns.size())
      fail_line(doc.row_lines[r], "expected " + std::to_string(doc.columns.size()) +
                                      " fields, got " + std::to_string(doc.rows[r].size()));
  }
  return doc;
}

void expect_columns(const CsvDoc& doc, std::span<const Column> cols,
                    const std::filesystem::path& path) {
  if (doc.columns.size() != cols.size())
    throw CsvError(path.string() + ": expected " + std::to_string(cols.size()) +
                   " columns, got " + std::to_string(doc.columns.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (doc.columns[i] != cols[i].name)
      throw CsvError(path.string() + ": column " + std::to_string(i + 1) + " is '" +
                     doc.columns[i] + "', expected '" + cols[i].name + "'");
    if (doc.units[i] != cols[i].unit)
      throw CsvError(path.string() + ": column '" + doc.columns[i] + "' has unit '" +
                     doc.units[i] + "', expected '" + cols[i].unit + "'");
  }
}

double num_field(const CsvDoc& doc, std::size_t r, std::size_t col) {
  const std::string& s = doc.rows[r][col];
  const auto v = parse_double(s);
  if (!v)
    fail_line(doc.row_lines[r],
              "column '" + doc.columns[col] + "': invalid number '" + s + "'");
  return *v;
}

std::optional<double> opt_field(const CsvDoc& doc, std::size_t r, std::size_t col) {
  if (doc.rows[r][col].empty()) return std::nullopt;
  return num_field(doc, r, col);
}

bool bool_field(const CsvDoc& doc, std::size_t r, std::size_t col) {
  const std::string& s = doc.rows[r][col];
  if (s == "0") return false;
  if (s == "1") return true;
  fail_line(doc.row_lines[r], "column '" + doc.columns[col] + "': expected 0 or 1, got '" +
                                  s + "'");
}

void header(std::string& out, const char* kind, std::span<const Column> cols) {
  out += "# schema_version: 1\n# kind: ";
  out += kind;
  out += "\n# units:";
  for (const auto& c : cols) {
    out += ' ';
    out += c.name;
    out += '=';
    out += c.unit;
  }
  out += '\n';
}

void column_row(std::string& out, std::span<const Column> cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i].name;
  }
  out += '\n';
}

std::string meta_value(const CsvDoc& doc, const char* key,
                       const std::filesystem::path& path) {
  const auto it = doc.meta.find(key);
  if (it == doc.meta.end())
    throw CsvError(path.string() + ": missing metadata '" + std::string(key) + "'");
  return it->second;
}

double meta_number(const CsvDoc& doc, const char* key, const std::filesystem::path& path) {
  const std::string s = meta_value(doc, key, path);
  const auto v = parse_double(s);
  if (!v) throw CsvError(path.string() + ": metadata '" + std::string(key) +
                         "' is not a number: '" + s + "'");
  return *v;
}

constexpr Column kSpectrumColsDisp[] = {{"frequency_hz", "Hz"}, {"psd", "m^2/Hz"}};
constexpr Column kSpectrumColsFreq[] = {{"frequency_hz", "Hz"}, {"psd", "Hz^2/Hz"}};
constexpr Column kSweepCols[] = {
    {"detuning_hz", "Hz"}, {"n_photon", "1"},   {"Gamma_hz", "Hz"},
    {"Omega_hz", "Hz"},    {"gamma_m_hz", "Hz"}, {"T_m_K", "K"},
    {"m_bar", "1"},        {"regenerative", "bool"}, {"multistable", "bool"}};
constexpr Column kCoolingCols[] = {
    {"P_c_W", "W"},  {"detuning_hz", "Hz"}, {"gamma_m_hz", "Hz"},
    {"T_m_K", "K"},  {"m_bar", "1"},        {"floor_m2_per_hz", "m^2/Hz"}};
constexpr Column kCalibrationCols[] = {{"T_K", "K"}, {"mean_square_freq_hz2", "Hz^2"}};

}  // namespace

void write_spectrum(const std::filesystem::path& path, const SpectrumTrace& trace) {
  if (trace.psd.size() != trace.frequency_hz.size())
    throw std::invalid_argument("write_spectrum: grid/psd length mismatch");
  if (trace.provenance.find('\n') != std::string::npos)
    throw std::invalid_argument("write_spectrum: provenance must be single-line");
  const bool disp = trace.unit == SpectrumUnit::displacement;
  const std::span<const Column> cols = disp ? kSpectrumColsDisp : kSpectrumColsFreq;

  std::string out;
  header(out, "spectrum", cols);
  out += "# n_avg: " + std::to_string(trace.n_avg) + "\n";
  if (trace.seed) out += "# seed: " + std::to_string(*trace.seed) + "\n";
  if (!trace.provenance.empty()) out += "# provenance: " + trace.provenance + "\n";
  column_row(out, cols);
  for (std::size_t i = 0; i < trace.psd.size(); ++i) {
    out += format_double(trace.frequency_hz[i]);
    out += ',';
    out += format_double(trace.psd[i]);
    out += '\n';
  }
  atomic_write_file(path, out);
}

SpectrumTrace read_spectrum(const std::filesystem::path& path,
                            std::optional<SpectrumUnit> expect) {
  const CsvDoc doc = read_doc(path, "spectrum");
  SpectrumUnit unit;
  if (doc.units.size() == 2 && doc.units[1] == "m^2/Hz") {
    unit = SpectrumUnit::displacement;
    expect_columns(doc, kSpectrumColsDisp, path);
  } else if (doc.units.size() == 2 && doc.units[1] == "Hz^2/Hz") {
    unit = SpectrumUnit::cavity_frequency;
    expect_columns(doc, kSpectrumColsFreq, path);
  } else {
    throw CsvError(path.string() + ": psd unit must be m^2/Hz or Hz^2/Hz");
  }
  if (expect && unit != *expect)
    throw CsvError(path.string() + ": psd unit is '" + doc.units[1] + "', but this " +
                   (*expect == SpectrumUnit::displacement ? "displacement"
                                                          : "cavity-frequency") +
                   " pipeline requires '" +
                   (*expect == SpectrumUnit::displacement ? "m^2/Hz" : "Hz^2/Hz") + "'");

  SpectrumTrace trace;
  trace.unit = unit;
  const double n_avg = meta_number(doc, "n_avg", path);
  if (!(n_avg >= 1.0) || n_avg != static_cast<double>(static_cast<int>(n_avg)))
    throw CsvError(path.string() + ": n_avg must be a positive integer");
  trace.n_avg = static_cast<int>(n_avg);
  if (doc.meta.count("seed")) {
    const std::string s = doc.meta.at("seed");
    std::uint64_t seed = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw CsvError(path.string() + ": seed is not an unsigned integer: '" + s + "'");
    trace.seed = seed;
  }
  if (doc.meta.count("provenance")) trace.provenance = doc.meta.at("provenance");

  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    trace.frequency_hz.push_back(num_field(doc, r, 0));
    trace.psd.push_back(num_field(doc, r, 1));
  }
  for (std::size_t i = 1; i < trace.frequency_hz.size(); ++i) {
    if (!(trace.frequency_hz[i] > trace.frequency_hz[i - 1]))
      throw CsvError(path.string() + ": frequency grid not strictly increasing");
  }
  return trace;
}

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep) {
  std::string out;
  header(out, "sweep", kSweepCols);
  out += std::string("# mode: ") + (sweep.mode == SweepMode::constant_circulating
                                        ? "const-circulating"
                                        : "const-incident") + "\n";
  out += "# power_W: " + format_double(sweep.power) + "\n";
  out += "# kerr_K_hz: " + format_double(sweep.kerr_coeff / two_pi) + "\n";
  column_row(out, kSweepCols);
  for (const auto& row : sweep.rows) {
    out += format_double(row.detuning_hz);
    out += ',';
    out += format_double(row.n_photon);
    out += ',';
    out += format_double(row.Gamma_hz);
    out += ',';
    out += format_double(row.Omega_hz);
    out += ',';
    out += format_double(row.gamma_m_hz);
    out += ',';
    if (row.T_m) out += format_double(*row.T_m);
    out += ',';
    if (row.m_bar) out += format_double(*row.m_bar);
    out += ',';
    out += row.regenerative ? '1' : '0';
    out += ',';
    out += row.multistable ? '1' : '0';
    out += '\n';
  }
  atomic_write_file(path, out);
}

SweepResult read_sweep(const std::filesystem::path& path) {
  const CsvDoc doc = read_doc(path, "sweep");
  expect_columns(doc, kSweepCols, path);

  SweepResult sweep;
  const std::string mode = meta_value(doc, "mode", path);
  if (mode == "const-circulating")
    sweep.mode = SweepMode::constant_circulating;
  else if (mode == "const-incident")
    sweep.mode = SweepMode::constant_incident;
  else
    throw CsvError(path.string() + ": unknown mode '" + mode + "'");
  sweep.power = meta_number(doc, "power_W", path);
  sweep.kerr_coeff = meta_number(doc, "kerr_K_hz", path) * two_pi;

  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    SweepRow row;
    row.detuning_hz = num_field(doc, r, 0);
    row.n_photon = num_field(doc, r, 1);
    row.Gamma_hz = num_field(doc, r, 2);
    row.Omega_hz = num_field(doc, r, 3);
    row.gamma_m_hz = num_field(doc, r, 4);
    row.T_m = opt_field(doc, r, 5);
    row.m_bar = opt_field(doc, r, 6);
    row.regenerative = bool_field(doc, r, 7);
    row.multistable = bool_field(doc, r, 8);
    if (row.regenerative && (row.T_m || row.m_bar))
      fail_line(doc.row_lines[r], "regenerative row carries thermometry values");
    if (!row.regenerative && (!row.T_m || !row.m_bar))
      fail_line(doc.row_lines[r], "non-regenerative row missing thermometry values");
    sweep.rows.push_back(row);
  }
  return sweep;
}

void write_cooling(const std::filesystem::path& path, const CoolingResult& cooling) {
  std::string out;
  header(out, "cooling", kCoolingCols);
  column_row(out, kCoolingCols);
  for (const auto& row : cooling.rows) {
    out += format_double(row.P_c);
    out += ',';
    out += format_double(row.detuning_hz);
    out += ',';
    out += format_double(row.gamma_m_hz);
    out += ',';
    out += format_double(row.T_m);
    out += ',';
    out += format_double(row.m_bar);
    out += ',';
    out += format_double(row.floor);
    out += '\n';
  }
  atomic_write_file(path, out);
}

CoolingResult read_cooling(const std::filesystem::path& path) {
  const CsvDoc doc = read_doc(path, "cooling");
  expect_columns(doc, kCoolingCols, path);
  CoolingResult cooling;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    CoolingRow row;
    row.P_c = num_field(doc, r, 0);
    row.detuning_hz = num_field(doc, r, 1);
    row.gamma_m_hz = num_field(doc, r, 2);
    row.T_m = num_field(doc, r, 3);
    row.m_bar = num_field(doc, r, 4);
    row.floor = num_field(doc, r, 5);
    cooling.rows.push_back(row);
  }
  return cooling;
}

void write_calibration(const std::filesystem::path& path,
                       std::span<const CalibrationPoint> points) {
  std::string out;
  header(out, "calibration", kCalibrationCols);
  column_row(out, kCalibrationCols);
  for (const auto& p : points) {
    out += format_double(p.T);
    out += ',';
    out += format_double(p.mean_square_freq);
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<CalibrationPoint> read_calibration(const std::filesystem::path& path) {
  const CsvDoc doc = read_doc(path, "calibration");
  expect_columns(doc, kCalibrationCols, path);
  std::vector<CalibrationPoint> points;
  for (std::size_t r = 0; r < doc.rows.size(); ++r)
    points.push_back(CalibrationPoint{num_field(doc, r, 0), num_field(doc, r, 1)});
  return points;
}

}  // namespace optomech
