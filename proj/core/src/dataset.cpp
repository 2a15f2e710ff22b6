#include "confsa/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "confsa/error.hpp"
#include "confsa/random.hpp"

namespace confsa {

ObservationalDataset::ObservationalDataset(std::vector<Unit> rows, std::vector<std::string> names)
    : rows_(std::move(rows)), names_(std::move(names)) {
  if (!rows_.empty()) dim_ = rows_.front().covariates.size();
  if (dim_ == 0 && !rows_.empty()) throw InputError("units need at least one covariate");
  if (!names_.empty() && names_.size() != dim_)
    throw InputError("covariate name count does not match covariate dimension");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Unit& u = rows_[i];
    if (u.covariates.size() != dim_)
      throw InputError("unit " + std::to_string(i) + " has the wrong covariate count");
    for (double v : u.covariates)
      if (!std::isfinite(v)) throw InputError("unit " + std::to_string(i) + " has a non-finite covariate");
    if (u.treatment != 0 && u.treatment != 1)
      throw InputError("unit " + std::to_string(i) + " has a non-binary treatment");
    if (!std::isfinite(u.outcome))
      throw InputError("unit " + std::to_string(i) + " has a non-finite outcome");
  }
}

Matrix ObservationalDataset::covariates() const {
  Matrix X(rows_.size(), dim_);
  for (std::size_t i = 0; i < rows_.size(); ++i)
    std::copy(rows_[i].covariates.begin(), rows_[i].covariates.end(), X.row(i).begin());
  return X;
}

Matrix ObservationalDataset::covariates(std::span<const std::size_t> idx) const {
  Matrix X(idx.size(), dim_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& c = rows_.at(idx[i]).covariates;
    std::copy(c.begin(), c.end(), X.row(i).begin());
  }
  return X;
}

std::vector<double> ObservationalDataset::outcomes(std::span<const std::size_t> idx) const {
  std::vector<double> y(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) y[i] = rows_.at(idx[i]).outcome;
  return y;
}

std::vector<int> ObservationalDataset::treatments(std::span<const std::size_t> idx) const {
  std::vector<int> t(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) t[i] = rows_.at(idx[i]).treatment;
  return t;
}

std::vector<int> ObservationalDataset::treatments() const {
  std::vector<int> t(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) t[i] = rows_[i].treatment;
  return t;
}

ObservationalDataset ObservationalDataset::subset(std::span<const std::size_t> idx) const {
  std::vector<Unit> rows;
  rows.reserve(idx.size());
  for (auto i : idx) rows.push_back(rows_.at(i));
  return ObservationalDataset(std::move(rows), names_);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_number(const std::string& text, double& out) {
  std::string t = trim(text);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = t.data() + t.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e && std::isfinite(out);
}

}  // namespace

ObservationalDataset parse_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_fields(line);
  for (auto& h : header) h = trim(h);

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!col.emplace(header[j], j).second) throw InputError("duplicate column '" + header[j] + "'");
  }
  auto find = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw InputError("column '" + name + "' not found in header");
    return it->second;
  };
  const std::size_t t_col = find(schema.treatment);
  const std::size_t y_col = find(schema.outcome);
  std::vector<std::string> names = schema.covariates;
  if (names.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (j != t_col && j != y_col) names.push_back(header[j]);
  }
  if (names.empty()) throw InputError("schema selects no covariate columns");
  std::vector<std::size_t> x_cols;
  for (const auto& n : names) x_cols.push_back(find(n));

  std::vector<Unit> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row_no;
    auto fields = split_fields(line);
    const std::string where = "row " + std::to_string(row_no);
    if (fields.size() != header.size())
      throw InputError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    Unit u;
    u.covariates.resize(x_cols.size());
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      if (!parse_number(fields[x_cols[j]], u.covariates[j]))
        throw InputError(where + ": non-numeric value in column '" + names[j] + "'");
    }
    double t = 0.0;
    if (!parse_number(fields[t_col], t))
      throw InputError(where + ": non-numeric treatment");
    if (t != 0.0 && t != 1.0) throw InputError(where + ": treatment must be 0 or 1");
    u.treatment = static_cast<int>(t);
    if (!parse_number(fields[y_col], u.outcome))
      throw InputError(where + ": non-numeric outcome");
    rows.push_back(std::move(u));
  }
  if (rows.empty()) throw InputError("no data rows");
  return ObservationalDataset(std::move(rows), std::move(names));
}

ObservationalDataset ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_csv(in, schema);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_csv(const ObservationalDataset& ds, std::ostream& out, const CsvSchema& schema) {
  std::vector<std::string> names = ds.names();
  if (names.empty()) {
    for (std::size_t j = 0; j < ds.covariate_dim(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  for (const auto& n : names) out << n << ',';
  out << schema.treatment << ',' << schema.outcome << '\n';
  for (const auto& u : ds.rows()) {
    for (double v : u.covariates) out << format_double(v) << ',';
    out << u.treatment << ',' << format_double(u.outcome) << '\n';
  }
}

void write_csv(const ObservationalDataset& ds, const std::filesystem::path& path,
               const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(ds, out, schema);
}

SplitPlan split(std::size_t n, const std::vector<double>& fractions, std::uint64_t seed) {
  if (fractions.empty()) throw ContractError("split needs at least one fraction");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ContractError("split fractions must be positive");
    total += f;
  }
  if (total > 1.0 + 1e-12) throw ContractError("split fractions sum to more than 1");

  IndexSet perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed, {0x5ba1'17ULL});
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitPlan plan;
  plan.seed = seed;
  plan.fractions = fractions;
  const bool exhaustive = std::abs(total - 1.0) <= 1e-12;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < fractions.size(); ++s) {
    std::size_t size = static_cast<std::size_t>(std::floor(fractions[s] * static_cast<double>(n) + 1e-9));
    if (exhaustive && s + 1 == fractions.size()) size = n - pos;
    size = std::min(size, n - pos);
    plan.sets.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                           perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(plan.sets.back().begin(), plan.sets.back().end());
    pos += size;
  }
  return plan;
}

SplitPlan split(const ObservationalDataset& ds, const std::vector<double>& fractions,
                std::uint64_t seed) {
  return split(ds.size(), fractions, seed);
}

IndexSet arm_indices(const ObservationalDataset& ds, int t) {
  IndexSet out;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds[i].treatment == t) out.push_back(i);
  return out;
}

IndexSet arm_indices(const ObservationalDataset& ds, std::span<const std::size_t> within, int t) {
  IndexSet out;
  for (auto i : within)
    if (ds[i].treatment == t) out.push_back(i);
  return out;
}

}  // namespace confsa
