#include "nilmaug/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>

#include "json.hpp"

#include "nilmaug/format.hpp"

namespace nilmaug {

namespace fs = std::filesystem;

void PowerSeries::validate() const {
  if (period <= 0) throw DataError("series '" + name + "': period must be positive");
  const bool reactive = has_reactive();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.offset < 0) throw DataError("series '" + name + "': negative offset");
    if (i > 0 && s.offset <= samples[i - 1].offset)
      throw DataError("series '" + name + "': offsets not strictly increasing at index " +
                      std::to_string(i));
    if (!std::isfinite(s.real_w)) throw DataError("series '" + name + "': non-finite value");
    if (s.reactive_var.has_value() != reactive)
      throw DataError("series '" + name + "': reactive channel present on some samples only");
    if (reactive && !std::isfinite(*s.reactive_var))
      throw DataError("series '" + name + "': non-finite reactive value");
  }
}

const char* to_string(ApplianceGroup g) {
  switch (g) {
    case ApplianceGroup::Cooling: return "Cooling";
    case ApplianceGroup::Cooking: return "Cooking";
    case ApplianceGroup::Entertainment: return "Entertainment";
    case ApplianceGroup::Computer: return "Computer";
    case ApplianceGroup::Lighting: return "Lighting";
    case ApplianceGroup::Other: return "Other";
  }
  return "Other";
}

ApplianceGroup group_of(const std::string& appliance) {
  std::string key;
  for (char c : appliance) {
    if (c == ' ' || c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  static const std::map<std::string, ApplianceGroup> table = {
      {"fridge", ApplianceGroup::Cooling},
      {"freezer", ApplianceGroup::Cooling},
      {"coffeemachine", ApplianceGroup::Cooking},
      {"microwave", ApplianceGroup::Cooking},
      {"waterkettle", ApplianceGroup::Cooking},
      {"kettle", ApplianceGroup::Cooking},
      {"stove", ApplianceGroup::Cooking},
      {"tv", ApplianceGroup::Entertainment},
      {"stereo", ApplianceGroup::Entertainment},
      {"stereosystem", ApplianceGroup::Entertainment},
      {"entertainmentsystem", ApplianceGroup::Entertainment},
      {"pc", ApplianceGroup::Computer},
      {"laptop", ApplianceGroup::Computer},
      {"laptoppc", ApplianceGroup::Computer},
      {"lamp", ApplianceGroup::Lighting},
  };
  auto it = table.find(key);
  return it == table.end() ? ApplianceGroup::Other : it->second;
}

void GapPolicy::validate() const {
  if (!(max_gap_factor >= 1.0)) throw ConfigError("max_gap_factor must be >= 1");
}

LayoutFormat parse_layout_format(const std::string& s) {
  if (s == "canonical_csv") return LayoutFormat::CanonicalCsv;
  if (s == "eco_day_files") return LayoutFormat::EcoDayFiles;
  if (s == "iawe_csv") return LayoutFormat::IaweCsv;
  throw ConfigError("unknown layout format '" + s + "'");
}

std::map<std::string, Channel> parse_channel_map(const std::string& spec) {
  std::map<std::string, Channel> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("channel_map entries look like column=real|reactive");
    const std::string ch = item.substr(eq + 1);
    if (ch != "real" && ch != "reactive") throw ConfigError("channel must be real or reactive, got '" + ch + "'");
    out[item.substr(0, eq)] = ch == "real" ? Channel::Real : Channel::Reactive;
  }
  return out;
}

namespace {

std::string_view trim(std::string_view v) {
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Blank and NaN fields are missing; anything else must parse completely.
std::optional<double> parse_value(std::string_view f, const std::string& path, std::size_t line) {
  if (f.empty() || f == "nan" || f == "NaN" || f == "NAN") return std::nullopt;
  if (f.front() == '+') f.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
    throw IngestError(path, line, "cannot parse number '" + std::string(f) + "'");
  return v;
}

std::int64_t parse_timestamp(std::string_view f, const std::string& path, std::size_t line) {
  std::int64_t t = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), t);
  if (ec == std::errc() && ptr == f.data() + f.size()) return t;
  // Fractional epoch seconds (iAWE exports) round to the nearest second.
  auto v = parse_value(f, path, line);
  if (!v) throw IngestError(path, line, "missing timestamp");
  return static_cast<std::int64_t>(std::llround(*v));
}

struct Row {
  std::int64_t timestamp;
  std::size_t line;
  std::optional<double> real;
  std::optional<double> reactive;
};

bool is_missing(const std::optional<double>& v, double sentinel) {
  return !v.has_value() || *v == sentinel;
}

PowerSeries assemble(std::vector<Row> rows, bool with_reactive, const DatasetLayout& layout,
                     const std::string& path) {
  if (rows.empty()) throw IngestError(path, 0, "empty file");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].timestamp <= rows[i - 1].timestamp)
      throw IngestError(path, rows[i].line,
                        "non-monotone timestamp " + std::to_string(rows[i].timestamp) +
                            " after " + std::to_string(rows[i - 1].timestamp));

  std::int64_t period = layout.period;
  if (period == 0) {
    for (std::size_t i = 1; i < rows.size(); ++i)
      period = std::gcd(period, rows[i].timestamp - rows[i - 1].timestamp);
    if (period == 0) period = 1;
  }
  if (period < 0) throw ConfigError("layout period must be positive");

  PowerSeries s;
  s.start = rows.front().timestamp;
  s.period = period;
  s.name = fs::path(path).stem().string();
  s.samples.reserve(rows.size());
  for (const Row& r : rows) {
    if ((r.timestamp - s.start) % period != 0)
      throw IngestError(path, r.line, "timestamp off the " + std::to_string(period) + " s grid");
    if (is_missing(r.real, layout.missing_sentinel)) continue;
    if (with_reactive && !r.reactive.has_value()) continue;
    Sample smp;
    smp.offset = (r.timestamp - s.start) / period;
    smp.real_w = *r.real;
    if (with_reactive) smp.reactive_var = r.reactive;
    s.samples.push_back(smp);
  }
  return s;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

PowerSeries ingest_canonical(const fs::path& path, const DatasetLayout& layout) {
  const std::string p = path.string();
  const auto lines = read_lines(path);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw IngestError(p, 0, "empty file");
  const auto header = split_fields(lines[first]);
  if (header.size() < 2 || header.size() > 3 || header[0] != "timestamp" || header[1] != "real_w" ||
      (header.size() == 3 && header[2] != "reactive_var"))
    throw IngestError(p, first + 1, "expected header 'timestamp,real_w[,reactive_var]'");
  const bool with_reactive = header.size() == 3;

  std::vector<Row> rows;
  rows.reserve(lines.size());
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != header.size())
      throw IngestError(p, i + 1, "expected " + std::to_string(header.size()) + " fields");
    Row r{parse_timestamp(f[0], p, i + 1), i + 1, parse_value(f[1], p, i + 1), std::nullopt};
    if (with_reactive) r.reactive = parse_value(f[2], p, i + 1);
    rows.push_back(r);
  }
  return assemble(std::move(rows), with_reactive, layout, p);
}

std::optional<std::int64_t> day_start_from_name(const fs::path& file) {
  static const std::regex re(R"((\d{4})-(\d{2})-(\d{2})\.csv)");
  std::smatch m;
  const std::string name = file.filename().string();
  if (!std::regex_match(name, m, re)) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(m[1])}, month{static_cast<unsigned>(std::stoi(m[2]))},
                           day{static_cast<unsigned>(std::stoi(m[3]))}};
  if (!ymd.ok()) return std::nullopt;
  return duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count();
}

std::pair<std::size_t, std::optional<std::size_t>> column_indices(const DatasetLayout& layout) {
  std::size_t real = 0;
  std::optional<std::size_t> reactive;
  for (const auto& [key, ch] : layout.channel_map) {
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
    if (ec != std::errc() || ptr != key.data() + key.size())
      throw ConfigError("eco_day_files channel_map keys must be column indices, got '" + key + "'");
    if (ch == Channel::Real)
      real = idx;
    else
      reactive = idx;
  }
  return {real, reactive};
}

PowerSeries ingest_eco(const fs::path& path, const DatasetLayout& layout) {
  std::vector<std::pair<std::int64_t, fs::path>> days;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (!e.is_regular_file()) continue;
      if (auto d = day_start_from_name(e.path())) days.emplace_back(*d, e.path());
    }
    if (days.empty()) throw DataError("no YYYY-MM-DD.csv files in '" + path.string() + "'");
    std::sort(days.begin(), days.end());
  } else {
    auto d = day_start_from_name(path);
    if (!d) throw DataError("eco day file name must be YYYY-MM-DD.csv: '" + path.string() + "'");
    days.emplace_back(*d, path);
  }

  const std::int64_t period = layout.period > 0 ? layout.period : 1;
  const std::int64_t per_day = 86400 / period;
  const auto [real_col, reactive_col] = column_indices(layout);

  std::vector<Row> rows;
  for (const auto& [day_start, file] : days) {
    const std::string p = file.string();
    const auto lines = read_lines(file);
    std::int64_t index = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      if (index >= per_day) throw IngestError(p, i + 1, "more lines than seconds in a day");
      const auto f = split_fields(lines[i]);
      const std::size_t need = std::max(real_col, reactive_col.value_or(0)) + 1;
      if (f.size() < need) throw IngestError(p, i + 1, "too few columns");
      Row r{day_start + index * period, i + 1, parse_value(f[real_col], p, i + 1), std::nullopt};
      if (reactive_col) r.reactive = parse_value(f[*reactive_col], p, i + 1);
      rows.push_back(r);
      ++index;
    }
  }
  DatasetLayout fixed = layout;
  fixed.period = period;
  PowerSeries s = assemble(std::move(rows), reactive_col.has_value(), fixed, days.front().second.string());
  s.name = fs::is_directory(path) ? path.filename().string() : path.stem().string();
  return s;
}

PowerSeries ingest_iawe(const fs::path& path, const DatasetLayout& layout) {
  const std::string p = path.string();
  const auto lines = read_lines(path);
  if (lines.empty()) throw IngestError(p, 0, "empty file");
  const auto header = split_fields(lines[0]);
  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };

  auto ts_col = find("timestamp");
  if (!ts_col) throw IngestError(p, 1, "no 'timestamp' column");
  std::optional<std::size_t> real_col;
  std::optional<std::size_t> reactive_col;
  if (layout.channel_map.empty()) {
    real_col = find("W");
    reactive_col = find("VAR");
  } else {
    for (const auto& [name, ch] : layout.channel_map) {
      auto idx = find(name);
      if (!idx) throw IngestError(p, 1, "no column '" + name + "'");
      (ch == Channel::Real ? real_col : reactive_col) = idx;
    }
  }
  if (!real_col) throw IngestError(p, 1, "no real power column");

  std::vector<Row> rows;
  rows.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != header.size()) throw IngestError(p, i + 1, "column count mismatch");
    Row r{parse_timestamp(f[*ts_col], p, i + 1), i + 1, parse_value(f[*real_col], p, i + 1),
          std::nullopt};
    if (reactive_col) {
      r.reactive = parse_value(f[*reactive_col], p, i + 1);
      if (r.reactive && *r.reactive == layout.missing_sentinel) r.reactive.reset();
    }
    rows.push_back(r);
  }
  return assemble(std::move(rows), reactive_col.has_value(), layout, p);
}

}  // namespace

PowerSeries ingest(const fs::path& path, const DatasetLayout& layout) {
  if (!fs::exists(path)) throw DataError("no such file: '" + path.string() + "'");
  PowerSeries s;
  switch (layout.format) {
    case LayoutFormat::CanonicalCsv: s = ingest_canonical(path, layout); break;
    case LayoutFormat::EcoDayFiles: s = ingest_eco(path, layout); break;
    case LayoutFormat::IaweCsv: s = ingest_iawe(path, layout); break;
  }
  s.validate();
  return s;
}

std::string to_canonical_csv(const PowerSeries& s) {
  std::string out = s.has_reactive() ? "timestamp,real_w,reactive_var\n" : "timestamp,real_w\n";
  out.reserve(out.size() + s.size() * 24);
  for (const Sample& smp : s.samples) {
    out += std::to_string(s.timestamp(smp.offset));
    out += ',';
    out += format_double(smp.real_w);
    if (smp.reactive_var) {
      out += ',';
      out += format_double(*smp.reactive_var);
    }
    out += '\n';
  }
  return out;
}

void write_canonical_csv(const PowerSeries& s, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << to_canonical_csv(s);
}

GapReport detect_gaps(const PowerSeries& s) {
  GapReport r;
  if (s.samples.size() < 2) return r;
  std::int64_t missing = 0;
  for (std::size_t i = 1; i < s.samples.size(); ++i) {
    const std::int64_t len = s.samples[i].offset - s.samples[i - 1].offset - 1;
    if (len > 0) {
      r.gaps.push_back({s.samples[i - 1].offset + 1, len});
      missing += len;
    }
  }
  const std::int64_t span = s.samples.back().offset - s.samples.front().offset + 1;
  r.missing_fraction = static_cast<double>(missing) / static_cast<double>(span);
  return r;
}

std::string gap_report_json(const GapReport& r) {
  nlohmann::ordered_json j;
  j["gaps"] = nlohmann::ordered_json::array();
  for (const Gap& g : r.gaps) j["gaps"].push_back({{"start", g.start}, {"len", g.length}});
  j["missing_fraction"] = r.missing_fraction;
  return j.dump();
}

PowerSeries downsample_first(const PowerSeries& s, std::int64_t target_period) {
  if (target_period <= 0 || target_period % s.period != 0)
    throw ConfigError("target period " + std::to_string(target_period) +
                      " s is not a positive multiple of the source period " +
                      std::to_string(s.period) + " s");
  const std::int64_t ratio = target_period / s.period;
  PowerSeries out;
  out.start = s.start;
  out.period = target_period;
  out.name = s.name;
  for (const Sample& smp : s.samples) {
    const std::int64_t bucket = smp.offset / ratio;
    if (!out.samples.empty() && out.samples.back().offset == bucket) continue;
    Sample o = smp;
    o.offset = bucket;
    out.samples.push_back(o);
  }
  return out;
}

PowerSeries slice(const PowerSeries& s, std::int64_t from, std::int64_t to) {
  if (from >= to) throw ConfigError("slice requires from < to");
  PowerSeries out;
  out.start = s.start;
  out.period = s.period;
  out.name = s.name;
  auto lo = std::lower_bound(s.samples.begin(), s.samples.end(), from,
                             [&](const Sample& smp, std::int64_t t) { return s.timestamp(smp.offset) < t; });
  auto hi = std::lower_bound(lo, s.samples.end(), to,
                             [&](const Sample& smp, std::int64_t t) { return s.timestamp(smp.offset) < t; });
  out.samples.assign(lo, hi);
  return out;
}

const Sample* SeriesLookup::at(std::int64_t timestamp) const {
  const PowerSeries& s = *s_;
  if (s.samples.empty()) return nullptr;
  const std::int64_t rel = timestamp - s.start;
  if (rel < 0 || rel % s.period != 0) return nullptr;
  const std::int64_t off = rel / s.period;
  // Dense series: index == offset - first offset.
  const std::int64_t guess = off - s.samples.front().offset;
  if (guess >= 0 && guess < static_cast<std::int64_t>(s.samples.size()) &&
      s.samples[static_cast<std::size_t>(guess)].offset == off)
    return &s.samples[static_cast<std::size_t>(guess)];
  auto it = std::lower_bound(s.samples.begin(), s.samples.end(), off,
                             [](const Sample& smp, std::int64_t o) { return smp.offset < o; });
  return (it != s.samples.end() && it->offset == off) ? &*it : nullptr;
}

}  // namespace nilmaug
