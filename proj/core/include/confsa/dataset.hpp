#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "confsa/matrix.hpp"

namespace confsa {

using IndexSet = std::vector<std::size_t>;

struct Unit {
  std::vector<double> covariates;
  int treatment = 0;
  double outcome = 0.0;
};

// Immutable observational sample (X_i, T_i, Y_i).
class ObservationalDataset {
 public:
  ObservationalDataset() = default;
  explicit ObservationalDataset(std::vector<Unit> rows,
                                std::vector<std::string> names = {});

  std::size_t size() const { return rows_.size(); }
  std::size_t covariate_dim() const { return dim_; }
  bool empty() const { return rows_.empty(); }
  const Unit& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<Unit>& rows() const { return rows_; }
  const std::vector<std::string>& names() const { return names_; }

  Matrix covariates() const;
  Matrix covariates(std::span<const std::size_t> idx) const;
  std::vector<double> outcomes(std::span<const std::size_t> idx) const;
  std::vector<int> treatments(std::span<const std::size_t> idx) const;
  std::vector<int> treatments() const;
  ObservationalDataset subset(std::span<const std::size_t> idx) const;

 private:
  std::vector<Unit> rows_;
  std::vector<std::string> names_;
  std::size_t dim_ = 0;
};

// Column mapping for CSV files. An empty covariate list selects every
// column other than the treatment and outcome columns, in file order.
struct CsvSchema {
  std::string treatment = "t";
  std::string outcome = "y";
  std::vector<std::string> covariates;
};

ObservationalDataset ingest_csv(const std::filesystem::path& path,
                                const CsvSchema& schema = {});
ObservationalDataset parse_csv(std::istream& in, const CsvSchema& schema = {});

// Writes covariates (by name, x1..xp if unnamed), then treatment and outcome.
void write_csv(const ObservationalDataset& ds, const std::filesystem::path& path,
               const CsvSchema& schema = {});
void write_csv(const ObservationalDataset& ds, std::ostream& out,
               const CsvSchema& schema = {});

// Decimal text with 17 significant digits; parses back to the same double.
std::string format_double(double v);

struct SplitPlan {
  std::vector<IndexSet> sets;
  std::uint64_t seed = 0;
  std::vector<double> fractions;

  const IndexSet& preliminary() const { return sets.at(0); }
  const IndexSet& calibration() const { return sets.at(1); }
  const IndexSet& validation() const { return sets.at(2); }

  bool operator==(const SplitPlan&) const = default;
};

// Shuffles indices with the seed and cuts consecutive blocks of size
// floor(f * n). When the fractions sum to one the last block absorbs
// the rounding remainder.
SplitPlan split(const ObservationalDataset& ds, const std::vector<double>& fractions,
                std::uint64_t seed);
SplitPlan split(std::size_t n, const std::vector<double>& fractions, std::uint64_t seed);

IndexSet arm_indices(const ObservationalDataset& ds, int t);
// Indices from `within` whose unit has treatment t, order preserved.
IndexSet arm_indices(const ObservationalDataset& ds, std::span<const std::size_t> within,
                     int t);

}  // namespace confsa
