#pragma once

// Space-time cube data model: regions x time bins grid and the
// transformations commands delegate to. All operations are pure.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tcube/model.hpp"

namespace tcube {

struct Region {
  std::string id;
  std::string label;
  double u = 0.5;  // normalized map anchor
  double v = 0.5;
  friend bool operator==(const Region&, const Region&) = default;
};

/// Half-open [start, end) in the dataset's time unit (years by default).
struct TimeBin {
  long long start = 0;
  long long end = 0;
  long long width() const { return end - start; }
  friend bool operator==(const TimeBin&, const TimeBin&) = default;
};

std::string to_string(const TimeBin& b);

struct SpaceTimeCube {
  std::string name;
  std::string unit;
  std::string time_unit = "year";
  std::vector<Region> regions;
  std::vector<TimeBin> bins;
  std::vector<double> values;  // region-major

  double at(std::size_t region, std::size_t bin) const { return values[region * bins.size() + bin]; }
  std::size_t region_index(std::string_view id) const;  // npos when absent
};

/// Materialized selection of cells; hidden flags travel with the cells.
struct DataSlice {
  std::string unit;
  std::vector<Region> regions;
  std::vector<TimeBin> bins;
  std::vector<double> values;  // region-major
  std::vector<bool> hidden;    // parallel to values

  std::size_t cell(std::size_t region, std::size_t bin) const { return region * bins.size() + bin; }
  double at(std::size_t region, std::size_t bin) const { return values[cell(region, bin)]; }
  bool is_hidden(std::size_t region, std::size_t bin) const { return hidden[cell(region, bin)]; }
  double total() const;
  friend bool operator==(const DataSlice&, const DataSlice&) = default;
};

struct CellRef {
  std::string region_id;
  TimeBin bin;
  double value = 0.0;
  friend bool operator==(const CellRef&, const CellRef&) = default;
};

struct ExtremeReport {
  CellRef min_cell;
  CellRef max_cell;
};

enum class ArithOp : std::uint8_t { add, subtract };

/// Parses the line-oriented dataset document. Throws Error{schema} naming
/// the offending row and column.
SpaceTimeCube load_dataset(std::string_view text);
SpaceTimeCube load_dataset_file(const std::string& path);
std::string dataset_text(const SpaceTimeCube& cube);

DataSlice whole(const SpaceTimeCube& cube);
/// Regions by index, bins as the index range [bin_first, bin_last).
DataSlice slice(const SpaceTimeCube& cube, const std::vector<std::size_t>& regions,
                std::size_t bin_first, std::size_t bin_last);

DataSlice arith(const DataSlice& a, const DataSlice& b, ArithOp op);
DataSlice flatten(const DataSlice& s, DataAxis axis, Aggregator aggregator);
std::vector<DataSlice> chop(const DataSlice& s, DataAxis axis, int parts);
/// Coarsens to bins `granularity` time units wide, summing.
DataSlice rescale(const DataSlice& s, long long granularity);
/// Time: keeps bins overlapping [lo, hi). Space: keeps regions with slice
/// index in [lo, hi).
DataSlice filter_range(const DataSlice& s, DataAxis axis, long long lo, long long hi);
ExtremeReport extremes(const DataSlice& s);
/// Region indices ordered by visible sum or by label; stable.
std::vector<std::size_t> sort_series(const DataSlice& s, SortKey key);

/// Deterministic synthetic values: mt19937_64 seeded with `seed`, each value
/// 100 + 900 * u with u the top 53 bits scaled to [0, 1), rounded to cents.
std::vector<double> synthetic_values(std::uint64_t seed, std::size_t count);

}  // namespace tcube
