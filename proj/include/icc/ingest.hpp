#ifndef ICC_INGEST_HPP
#define ICC_INGEST_HPP

// Delimited-text readers for measurement tables, long-format multi-unit data
// and claim batches. Comma-separated by default; a header line containing a
// tab and no comma switches the whole file to tab-separated. Blank lines are
// ignored; every reported error carries the 1-based line number.

#include "icc/core_stats.hpp"
#include "icc/error.hpp"
#include "icc/resample.hpp"
#include "icc/single.hpp"

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace icc::io {

namespace detail {

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Splits one record; double quotes group a field and "" escapes a quote.
inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

inline std::vector<Line> read_lines(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF")
    text.remove_prefix(3);
  std::vector<std::pair<std::size_t, std::string_view>> raw;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    if (!trim(line).empty())
      raw.emplace_back(number, line);
    if (nl == std::string_view::npos)
      break;
    text.remove_prefix(nl + 1);
  }
  std::vector<Line> lines;
  if (raw.empty())
    return lines;
  const auto header = raw.front().second;
  const char delim =
      header.find('\t') != std::string_view::npos && header.find(',') == std::string_view::npos
          ? '\t'
          : ',';
  lines.reserve(raw.size());
  for (const auto& [n, l] : raw)
    lines.push_back({n, split(l, delim)});
  return lines;
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  if (s.empty())
    return std::nullopt;
  if (s.front() == '+')
    s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  if (s.empty())
    return std::nullopt;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string join_csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += "\"\"";
    else
      out.push_back(c);
  }
  return out + "\"";
}

} // namespace detail

/// Wide format: header `subject,<session 1>,...,<session k>`, one row per
/// subject.
inline MeasurementTable parse_wide(std::string_view text) {
  const auto lines = detail::read_lines(text);
  if (lines.empty())
    throw ParseError("empty-input", 0, "input contains no header row");
  const auto& header = lines.front();
  if (header.fields.size() < 3)
    throw ParseError("too-few-columns", header.number,
                     "need a subject column and at least 2 measurement columns");
  const std::size_t k = header.fields.size() - 1;
  std::vector<std::string> sessions(header.fields.begin() + 1, header.fields.end());

  std::vector<std::string> subjects;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    if (line.fields.size() != header.fields.size())
      throw ParseError("ragged-row", line.number,
                       "expected " + std::to_string(header.fields.size()) + " fields, found " +
                           std::to_string(line.fields.size()));
    const auto& id = line.fields[0];
    if (id.empty())
      throw ParseError("ragged-row", line.number, "missing subject identifier");
    if (auto [it, fresh] = seen.emplace(id, line.number); !fresh)
      throw ParseError("duplicate-subject", line.number,
                       "subject '" + id + "' already defined on line " +
                           std::to_string(it->second));
    for (std::size_t j = 1; j <= k; ++j) {
      const auto& cell = line.fields[j];
      if (cell.empty())
        throw ParseError("ragged-row", line.number, "missing value in column '" +
                                                        header.fields[j] + "'");
      const auto v = detail::to_double(cell);
      if (!v)
        throw ParseError("non-numeric", line.number,
                         "value '" + cell + "' in column '" + header.fields[j] +
                             "' is not a finite number");
      values.push_back(*v);
    }
    subjects.push_back(id);
  }
  if (subjects.size() < 2)
    throw ParseError("too-few-subjects", lines.back().number,
                     "need at least 2 subject rows, found " + std::to_string(subjects.size()));
  return MeasurementTable(std::move(subjects), std::move(values), static_cast<int>(k),
                          std::move(sessions));
}

/// Inverse of parse_wide. Numbers use the shortest round-trip representation.
inline std::string write_wide(const MeasurementTable& table) {
  std::string out = "subject";
  for (const auto& s : table.sessions())
    out += "," + detail::join_csv_field(s);
  out += "\n";
  for (int i = 0; i < table.n_subjects(); ++i) {
    out += detail::join_csv_field(table.subjects()[static_cast<std::size_t>(i)]);
    for (double v : table.row(static_cast<std::size_t>(i)))
      out += "," + detail::format_double(v);
    out += "\n";
  }
  return out;
}

/// Long format: header `subject,unit,session,value`. The unit column names an
/// instrument or a region.
class LongTable {
public:
  const std::vector<std::string>& subjects() const noexcept { return subjects_; }
  const std::vector<std::string>& units() const noexcept { return units_; }
  const std::vector<std::string>& sessions() const noexcept { return sessions_; }

  double value(std::size_t subject, std::size_t unit, std::size_t session) const {
    return values_[(subject * units_.size() + unit) * sessions_.size() + session];
  }
  std::optional<std::size_t> unit_index(std::string_view name) const {
    for (std::size_t u = 0; u < units_.size(); ++u)
      if (units_[u] == name)
        return u;
    return std::nullopt;
  }
  /// Line of the first row mentioning a unit (for error reporting).
  std::size_t unit_line(std::size_t unit) const { return unit_lines_[unit]; }

private:
  friend LongTable parse_long(std::string_view text);

  std::vector<std::string> subjects_;
  std::vector<std::string> units_;
  std::vector<std::string> sessions_;
  std::vector<std::size_t> unit_lines_;
  std::vector<double> values_;
};

inline LongTable parse_long(std::string_view text) {
  const auto lines = detail::read_lines(text);
  if (lines.empty())
    throw ParseError("empty-input", 0, "input contains no header row");
  const auto& header = lines.front();
  const std::vector<std::string> expected{"subject", "unit", "session", "value"};
  if (header.fields != expected)
    throw ParseError("bad-header", header.number, "long format header must be "
                                                  "'subject,unit,session,value'");

  struct Index {
    std::vector<std::string> names;
    std::unordered_map<std::string, std::size_t> pos;
    std::vector<std::size_t> first_line;
    std::size_t get(const std::string& s, std::size_t line) {
      auto [it, fresh] = pos.emplace(s, names.size());
      if (fresh) {
        names.push_back(s);
        first_line.push_back(line);
      }
      return it->second;
    }
  };
  Index subj, unit, sess;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<double, std::size_t>> cells;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    if (line.fields.size() != 4)
      throw ParseError("ragged-row", line.number,
                       "expected 4 fields, found " + std::to_string(line.fields.size()));
    for (std::size_t f = 0; f < 3; ++f)
      if (line.fields[f].empty())
        throw ParseError("ragged-row", line.number, "empty '" + expected[f] + "' field");
    const auto v = detail::to_double(line.fields[3]);
    if (!v)
      throw ParseError("non-numeric", line.number,
                       "value '" + line.fields[3] + "' is not a finite number");
    const auto key = std::make_tuple(subj.get(line.fields[0], line.number),
                                     unit.get(line.fields[1], line.number),
                                     sess.get(line.fields[2], line.number));
    if (auto [it, fresh] = cells.emplace(key, std::make_pair(*v, line.number)); !fresh)
      throw ParseError("duplicate-observation", line.number,
                       "(" + line.fields[0] + ", " + line.fields[1] + ", " + line.fields[2] +
                           ") already given on line " + std::to_string(it->second.second));
  }

  LongTable t;
  t.subjects_ = subj.names;
  t.units_ = unit.names;
  t.sessions_ = sess.names;
  t.unit_lines_ = unit.first_line;
  t.values_.resize(subj.names.size() * unit.names.size() * sess.names.size());
  for (std::size_t s = 0; s < subj.names.size(); ++s)
    for (std::size_t u = 0; u < unit.names.size(); ++u)
      for (std::size_t e = 0; e < sess.names.size(); ++e) {
        const auto it = cells.find({s, u, e});
        if (it == cells.end())
          throw ParseError("incomplete-crossing", subj.first_line[s],
                           "no value for subject '" + subj.names[s] + "', unit '" +
                               unit.names[u] + "', session '" + sess.names[e] + "'");
        t.values_[(s * unit.names.size() + u) * sess.names.size() + e] = it->second.first;
      }
  return t;
}

/// Assignment of long-format units to side 1 / side 2 (instruments for a
/// paired bootstrap, region groups A / B for a panel).
struct UnitMapping {
  std::vector<std::string> first;
  std::vector<std::string> second;
};

/// Sidecar mapping file: header `unit,group`, group one of 1/2/A/B.
inline UnitMapping parse_unit_mapping(std::string_view text) {
  const auto lines = detail::read_lines(text);
  if (lines.empty())
    throw ParseError("empty-input", 0, "mapping contains no header row");
  if (lines.front().fields != std::vector<std::string>{"unit", "group"})
    throw ParseError("bad-header", lines.front().number, "mapping header must be 'unit,group'");
  UnitMapping m;
  std::set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    if (line.fields.size() != 2 || line.fields[0].empty())
      throw ParseError("ragged-row", line.number, "expected 'unit,group'");
    if (!seen.insert(line.fields[0]).second)
      throw ParseError("duplicate-unit", line.number, "unit '" + line.fields[0] + "' mapped twice");
    const auto& g = line.fields[1];
    if (g == "1" || g == "A" || g == "a")
      m.first.push_back(line.fields[0]);
    else if (g == "2" || g == "B" || g == "b")
      m.second.push_back(line.fields[0]);
    else
      throw ParseError("bad-group", line.number, "group must be 1, 2, A or B (got '" + g + "')");
  }
  return m;
}

namespace detail {

inline std::vector<std::size_t> resolve_units(const LongTable& t, const UnitMapping& m) {
  std::vector<std::size_t> side(t.units().size(), 0);
  auto assign = [&](const std::vector<std::string>& names, std::size_t which) {
    for (const auto& name : names) {
      const auto u = t.unit_index(name);
      if (!u)
        throw ParseError("unknown-unit", 0, "mapped unit '" + name + "' does not occur in the data");
      if (side[*u] != 0)
        throw ParseError("unknown-unit", t.unit_line(*u),
                         "unit '" + name + "' is assigned to both sides");
      side[*u] = which;
    }
  };
  assign(m.first, 1);
  assign(m.second, 2);
  for (std::size_t u = 0; u < side.size(); ++u)
    if (side[u] == 0)
      throw ParseError("unknown-unit", t.unit_line(u),
                       "unit '" + t.units()[u] + "' is not in the unit mapping");
  return side;
}

} // namespace detail

/// Two instruments on one cohort: the mapping must name exactly one unit per
/// side.
inline PairedMeasurements paired_from_long(const LongTable& t, const UnitMapping& m) {
  if (m.first.size() != 1 || m.second.size() != 1)
    throw DomainError("bad-mapping", "a paired comparison needs exactly one unit per instrument");
  detail::resolve_units(t, m);
  const auto u1 = *t.unit_index(m.first.front());
  const auto u2 = *t.unit_index(m.second.front());
  const std::size_t k = t.sessions().size();
  std::vector<double> values;
  values.reserve(t.subjects().size() * 2 * k);
  for (std::size_t s = 0; s < t.subjects().size(); ++s) {
    for (std::size_t e = 0; e < k; ++e)
      values.push_back(t.value(s, u1, e));
    for (std::size_t e = 0; e < k; ++e)
      values.push_back(t.value(s, u2, e));
  }
  return {t.subjects(), std::move(values), static_cast<int>(k), static_cast<int>(k)};
}

/// Region panel with group A = mapping.first, group B = mapping.second.
inline RegionPanel regions_from_long(const LongTable& t, const UnitMapping& m) {
  detail::resolve_units(t, m);
  std::vector<std::size_t> a, b;
  for (const auto& name : m.first)
    a.push_back(*t.unit_index(name));
  for (const auto& name : m.second)
    b.push_back(*t.unit_index(name));
  const std::size_t k = t.sessions().size();
  std::vector<double> values;
  values.reserve(t.subjects().size() * t.units().size() * k);
  for (std::size_t s = 0; s < t.subjects().size(); ++s)
    for (std::size_t u = 0; u < t.units().size(); ++u)
      for (std::size_t e = 0; e < k; ++e)
        values.push_back(t.value(s, u, e));
  return {t.subjects(), t.units(), std::move(values), static_cast<int>(k), std::move(a),
          std::move(b)};
}

enum class ClaimKind { single, difference };

/// One published ICC inference to re-evaluate.
struct ClaimRecord {
  std::size_t line = 0;
  std::string id;
  ClaimKind kind = ClaimKind::single;
  double r = 0.0;  ///< single claims
  double r1 = 0.0; ///< difference claims
  double r2 = 0.0;
  int n = 0;
  int k = 0;
  std::optional<double> rho0;
  std::optional<Tail> tail;
  std::optional<double> r12;
  std::string conclusion;
};

struct ClaimReject {
  std::size_t line = 0;
  std::string id; ///< error identifier
  std::string message;
};

struct ClaimBatch {
  std::vector<ClaimRecord> records;
  std::vector<ClaimReject> rejects;
  std::vector<std::string> warnings;
};

/// Claims file: columns are located by header name, in any order.
/// Required: kind (single|difference), n, k; r for single claims; r1, r2 for
/// difference claims. Optional: id, rho0, tail, r12, conclusion.
/// Invalid rows land in `rejects`; they never abort the batch.
inline ClaimBatch parse_claims(std::string_view text) {
  ClaimBatch batch;
  const auto lines = detail::read_lines(text);
  if (lines.empty()) {
    batch.warnings.push_back("claims input is empty");
    return batch;
  }
  const auto& header = lines.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.fields.size(); ++i)
    col[header.fields[i]] = i;
  for (const char* req : {"kind", "n", "k"})
    if (!col.count(req))
      throw ParseError("missing-column", header.number,
                       std::string("claims header lacks required column '") + req + "'");
  if (lines.size() == 1)
    batch.warnings.push_back("claims input has a header but no claims");

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    auto reject = [&](std::string id, std::string msg) {
      batch.rejects.push_back({line.number, std::move(id), std::move(msg)});
    };
    if (line.fields.size() != header.fields.size()) {
      reject("ragged-row", "expected " + std::to_string(header.fields.size()) +
                               " fields, found " + std::to_string(line.fields.size()));
      continue;
    }
    auto field = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      return it == col.end() ? std::string{} : line.fields[it->second];
    };

    ClaimRecord rec;
    rec.line = line.number;
    rec.id = field("id");
    rec.conclusion = field("conclusion");
    try {
      auto number = [&](const char* name) {
        const auto s = field(name);
        const auto v = detail::to_double(s);
        if (!v)
          throw DomainError("non-numeric", std::string("column '") + name + "' value '" + s +
                                               "' is not a finite number");
        return *v;
      };
      auto optional_number = [&](const char* name) -> std::optional<double> {
        if (field(name).empty())
          return std::nullopt;
        return number(name);
      };
      auto integer = [&](const char* name) {
        const auto s = field(name);
        const auto v = detail::to_int(s);
        if (!v)
          throw DomainError("non-numeric", std::string("column '") + name + "' value '" + s +
                                               "' is not an integer");
        return *v;
      };

      const auto kind = field("kind");
      if (kind == "single")
        rec.kind = ClaimKind::single;
      else if (kind == "difference")
        rec.kind = ClaimKind::difference;
      else
        throw DomainError("bad-kind", "kind must be 'single' or 'difference' (got '" + kind + "')");

      rec.n = integer("n");
      rec.k = integer("k");
      static_cast<void>(Design(rec.n, rec.k)); // validates N and k
      if (rec.kind == ClaimKind::single) {
        rec.r = number("r");
        require_fisher_domain(rec.r, rec.k);
      } else {
        rec.r1 = number("r1");
        rec.r2 = number("r2");
        require_fisher_domain(rec.r1, rec.k);
        require_fisher_domain(rec.r2, rec.k);
      }
      rec.rho0 = optional_number("rho0");
      if (rec.rho0 && !(*rec.rho0 >= 0.0 && *rec.rho0 < 1.0))
        throw DomainError("invalid-reference", "rho0 must lie in [0, 1)");
      rec.r12 = optional_number("r12");
      if (rec.r12 && !(*rec.r12 >= -1.0 && *rec.r12 <= 1.0))
        throw DomainError("invalid-r12", "r12 must lie in [-1, 1]");
      if (const auto t = field("tail"); !t.empty())
        rec.tail = parse_tail(t);
    } catch (const Error& e) {
      reject(e.id(), e.what());
      continue;
    }
    batch.records.push_back(std::move(rec));
  }
  return batch;
}

} // namespace icc::io

#endif // ICC_INGEST_HPP
