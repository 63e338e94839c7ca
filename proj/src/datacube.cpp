#include "tcube/datacube.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

std::string to_string(const TimeBin& b) {
  return std::to_string(b.start) + "-" + std::to_string(b.end);
}

std::size_t SpaceTimeCube::region_index(std::string_view id) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].id == id) return i;
  return std::string::npos;
}

double DataSlice::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

// ---------------------------------------------------------------------------
// Dataset document

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void schema(int line, const std::string& msg) {
  throw Error(Errc::schema, msg, line, 0);
}

TimeBin parse_bin(std::string_view s, int line) {
  // Accepts "1990-2000"; a leading minus belongs to the start value.
  auto dash = s.find('-', 1);
  if (dash == std::string_view::npos) schema(line, "bin '" + std::string(s) + "' is not start-end");
  auto a = parse_integer(trim(s.substr(0, dash)));
  auto b = parse_integer(trim(s.substr(dash + 1)));
  if (!a || !b) schema(line, "bin '" + std::string(s) + "' has non-integer bounds");
  if (*b <= *a) schema(line, "bin '" + std::string(s) + "' is empty");
  return {*a, *b};
}

}  // namespace

SpaceTimeCube load_dataset(std::string_view text) {
  SpaceTimeCube cube;
  bool header = false, have_bins = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (!header) {
      if (line != "#! tcube-dataset 1") schema(line_no, "missing '#! tcube-dataset 1' header");
      header = true;
      continue;
    }
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto colon = line.find(':');
    auto comma = line.find(',');
    if (colon != std::string_view::npos && (comma == std::string_view::npos || colon < comma)) {
      auto key = trim(line.substr(0, colon));
      auto value = trim(line.substr(colon + 1));
      if (key == "name") {
        cube.name = value;
      } else if (key == "unit") {
        cube.unit = value;
      } else if (key == "time_unit") {
        cube.time_unit = value;
      } else if (key == "bins") {
        for (auto b : split(value, ',')) cube.bins.push_back(parse_bin(trim(b), line_no));
        for (std::size_t i = 1; i < cube.bins.size(); ++i)
          if (cube.bins[i].start != cube.bins[i - 1].end)
            schema(line_no, "bins " + to_string(cube.bins[i - 1]) + " and " +
                                to_string(cube.bins[i]) +
                                (cube.bins[i].start < cube.bins[i - 1].end ? " overlap"
                                                                            : " leave a gap"));
        have_bins = true;
      } else {
        schema(line_no, "unknown header key '" + std::string(key) + "'");
      }
    } else {
      if (!have_bins) schema(line_no, "region row before the bins line");
      auto cells = split(line, ',');
      Region r;
      r.id = trim(cells[0]);
      if (r.id.empty()) schema(line_no, "row has an empty region id");
      const std::string where = "row " + std::to_string(line_no) + " (" + r.id + ")";
      if (cells.size() != 4 + cube.bins.size())
        schema(line_no, where + ": expected " + std::to_string(4 + cube.bins.size()) +
                            " cells, found " + std::to_string(cells.size()));
      if (cube.region_index(r.id) != std::string::npos)
        schema(line_no, where + ": duplicate region id");
      r.label = trim(cells[1]);
      auto u = parse_number(trim(cells[2]));
      auto v = parse_number(trim(cells[3]));
      if (!u || !v || *u < 0 || *u > 1 || *v < 0 || *v > 1)
        schema(line_no, where + ": anchor must be two numbers in [0,1]");
      r.u = *u;
      r.v = *v;
      for (std::size_t b = 0; b < cube.bins.size(); ++b) {
        auto x = parse_number(trim(cells[4 + b]));
        if (!x || !std::isfinite(*x))
          schema(line_no, where + ", bin " + to_string(cube.bins[b]) + ": '" +
                              std::string(trim(cells[4 + b])) + "' is not a finite number");
        cube.values.push_back(*x);
      }
      cube.regions.push_back(std::move(r));
    }
    if (end == text.size()) break;
  }
  if (!header) schema(0, "empty dataset document");
  if (cube.bins.empty()) schema(line_no, "dataset has no bins");
  if (cube.regions.empty()) schema(line_no, "dataset has no regions");
  return cube;
}

SpaceTimeCube load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open dataset '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_dataset(ss.str());
}

std::string dataset_text(const SpaceTimeCube& cube) {
  std::ostringstream os;
  os << "#! tcube-dataset 1\nname: " << cube.name << "\nunit: " << cube.unit
     << "\ntime_unit: " << cube.time_unit << "\nbins: ";
  for (std::size_t b = 0; b < cube.bins.size(); ++b) os << (b ? "," : "") << to_string(cube.bins[b]);
  os << '\n';
  for (std::size_t r = 0; r < cube.regions.size(); ++r) {
    const auto& reg = cube.regions[r];
    os << reg.id << ',' << reg.label << ',' << format_number(reg.u) << ',' << format_number(reg.v);
    for (std::size_t b = 0; b < cube.bins.size(); ++b) os << ',' << format_number(cube.at(r, b));
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Slicing

DataSlice whole(const SpaceTimeCube& cube) {
  std::vector<std::size_t> all(cube.regions.size());
  std::iota(all.begin(), all.end(), 0);
  return slice(cube, all, 0, cube.bins.size());
}

DataSlice slice(const SpaceTimeCube& cube, const std::vector<std::size_t>& regions,
                std::size_t bin_first, std::size_t bin_last) {
  if (regions.empty() || bin_first >= bin_last) throw Error(Errc::empty_selection, "empty selection");
  if (bin_last > cube.bins.size()) throw Error(Errc::invalid_argument, "bin range out of bounds");
  DataSlice s;
  s.unit = cube.unit;
  s.bins.assign(cube.bins.begin() + bin_first, cube.bins.begin() + bin_last);
  for (std::size_t r : regions) {
    if (r >= cube.regions.size()) throw Error(Errc::invalid_argument, "region index out of bounds");
    s.regions.push_back(cube.regions[r]);
    for (std::size_t b = bin_first; b < bin_last; ++b) s.values.push_back(cube.at(r, b));
  }
  s.hidden.assign(s.values.size(), false);
  return s;
}

// ---------------------------------------------------------------------------
// Transformations

DataSlice arith(const DataSlice& a, const DataSlice& b, ArithOp op) {
  if (a.bins != b.bins) throw Error(Errc::alignment, "slices cover different bins");
  if (a.regions.size() != b.regions.size())
    throw Error(Errc::alignment, "slices have different region counts");
  DataSlice out = a;
  const char sym = op == ArithOp::add ? '+' : '-';
  for (std::size_t r = 0; r < a.regions.size(); ++r) {
    out.regions[r].id = a.regions[r].id + sym + b.regions[r].id;
    out.regions[r].label = a.regions[r].label + ' ' + sym + ' ' + b.regions[r].label;
  }
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = op == ArithOp::add ? a.values[i] + b.values[i] : a.values[i] - b.values[i];
    out.hidden[i] = a.hidden[i] || b.hidden[i];
  }
  return out;
}

DataSlice flatten(const DataSlice& s, DataAxis axis, Aggregator aggregator) {
  if (s.values.empty()) throw Error(Errc::empty_selection, "cannot flatten an empty slice");
  DataSlice out;
  out.unit = s.unit;
  const std::size_t nr = s.regions.size(), nb = s.bins.size();
  if (axis == DataAxis::time) {
    out.regions = s.regions;
    out.bins = {{s.bins.front().start, s.bins.back().end}};
    for (std::size_t r = 0; r < nr; ++r) {
      double sum = 0.0;
      bool all_hidden = true;
      for (std::size_t b = 0; b < nb; ++b) {
        sum += s.at(r, b);
        all_hidden = all_hidden && s.is_hidden(r, b);
      }
      out.values.push_back(aggregator == Aggregator::sum ? sum : sum / double(nb));
      out.hidden.push_back(all_hidden);
    }
  } else {
    Region all{"all", "All", 0.0, 0.0};
    for (const auto& r : s.regions) {
      all.u += r.u / double(nr);
      all.v += r.v / double(nr);
    }
    out.regions = {all};
    out.bins = s.bins;
    for (std::size_t b = 0; b < nb; ++b) {
      double sum = 0.0;
      bool all_hidden = true;
      for (std::size_t r = 0; r < nr; ++r) {
        sum += s.at(r, b);
        all_hidden = all_hidden && s.is_hidden(r, b);
      }
      out.values.push_back(aggregator == Aggregator::sum ? sum : sum / double(nr));
      out.hidden.push_back(all_hidden);
    }
  }
  return out;
}

namespace {

DataSlice select(const DataSlice& s, std::size_t r0, std::size_t r1, std::size_t b0, std::size_t b1) {
  DataSlice out;
  out.unit = s.unit;
  out.regions.assign(s.regions.begin() + r0, s.regions.begin() + r1);
  out.bins.assign(s.bins.begin() + b0, s.bins.begin() + b1);
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t b = b0; b < b1; ++b) {
      out.values.push_back(s.at(r, b));
      out.hidden.push_back(s.is_hidden(r, b));
    }
  return out;
}

}  // namespace

std::vector<DataSlice> chop(const DataSlice& s, DataAxis axis, int parts) {
  const std::size_t extent = axis == DataAxis::time ? s.bins.size() : s.regions.size();
  if (parts < 1 || static_cast<std::size_t>(parts) > extent)
    throw Error(Errc::invalid_partition, "cannot chop " + std::to_string(extent) + " into " +
                                             std::to_string(parts) + " parts");
  const std::size_t base = extent / parts, rem = extent % parts;
  std::vector<DataSlice> out;
  std::size_t at = 0;
  for (int p = 0; p < parts; ++p) {
    const std::size_t len = base + (static_cast<std::size_t>(p) < rem ? 1 : 0);
    if (axis == DataAxis::time)
      out.push_back(select(s, 0, s.regions.size(), at, at + len));
    else
      out.push_back(select(s, at, at + len, 0, s.bins.size()));
    at += len;
  }
  return out;
}

DataSlice rescale(const DataSlice& s, long long granularity) {
  const long long width = s.bins.front().width();
  for (const auto& b : s.bins)
    if (b.width() != width) throw Error(Errc::invalid_partition, "source bins are uneven");
  if (granularity < width)
    throw Error(Errc::insufficient_resolution,
                "source bins are " + std::to_string(width) + " wide; cannot refine to " +
                    std::to_string(granularity));
  if (granularity % width != 0 || s.bins.size() % (granularity / width) != 0)
    throw Error(Errc::invalid_partition, "bins cannot be grouped evenly into " +
                                             std::to_string(granularity) + "-unit bins");
  const std::size_t k = static_cast<std::size_t>(granularity / width);
  const std::size_t nb = s.bins.size() / k;
  DataSlice out;
  out.unit = s.unit;
  out.regions = s.regions;
  for (std::size_t g = 0; g < nb; ++g) out.bins.push_back({s.bins[g * k].start, s.bins[g * k + k - 1].end});
  for (std::size_t r = 0; r < s.regions.size(); ++r)
    for (std::size_t g = 0; g < nb; ++g) {
      double sum = 0.0;
      bool all_hidden = true;
      for (std::size_t i = 0; i < k; ++i) {
        sum += s.at(r, g * k + i);
        all_hidden = all_hidden && s.is_hidden(r, g * k + i);
      }
      out.values.push_back(sum);
      out.hidden.push_back(all_hidden);
    }
  return out;
}

DataSlice filter_range(const DataSlice& s, DataAxis axis, long long lo, long long hi) {
  DataSlice out;
  out.unit = s.unit;
  if (axis == DataAxis::time) {
    std::vector<std::size_t> keep;
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      if (std::min(s.bins[b].end, hi) - std::max(s.bins[b].start, lo) > 0) keep.push_back(b);
    if (keep.empty()) throw Error(Errc::empty_selection, "range selects no bins");
    out.regions = s.regions;
    for (auto b : keep) out.bins.push_back(s.bins[b]);
    for (std::size_t r = 0; r < s.regions.size(); ++r)
      for (auto b : keep) {
        out.values.push_back(s.at(r, b));
        out.hidden.push_back(s.is_hidden(r, b));
      }
    return out;
  }
  const long long n = static_cast<long long>(s.regions.size());
  const long long a = std::max(lo, 0LL), z = std::min(hi, n);
  if (a >= z) throw Error(Errc::empty_selection, "range selects no regions");
  return select(s, static_cast<std::size_t>(a), static_cast<std::size_t>(z), 0, s.bins.size());
}

ExtremeReport extremes(const DataSlice& s) {
  bool found = false;
  ExtremeReport rep;
  for (std::size_t b = 0; b < s.bins.size(); ++b)
    for (std::size_t r = 0; r < s.regions.size(); ++r) {
      if (s.is_hidden(r, b)) continue;
      const CellRef c{s.regions[r].id, s.bins[b], s.at(r, b)};
      if (!found || c.value < rep.min_cell.value) rep.min_cell = c;
      if (!found || c.value > rep.max_cell.value) rep.max_cell = c;
      found = true;
    }
  if (!found) throw Error(Errc::empty_selection, "no visible cells");
  return rep;
}

std::vector<std::size_t> sort_series(const DataSlice& s, SortKey key) {
  std::vector<std::size_t> order(s.regions.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sums(s.regions.size(), 0.0);
  for (std::size_t r = 0; r < s.regions.size(); ++r)
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      if (!s.is_hidden(r, b)) sums[r] += s.at(r, b);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    switch (key) {
      case SortKey::value_asc: return sums[a] < sums[b];
      case SortKey::value_desc: return sums[a] > sums[b];
      case SortKey::label: return s.regions[a].label < s.regions[b].label;
    }
    return false;
  });
  return order;
}

std::vector<double> synthetic_values(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 gen(seed);
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    out.push_back(std::round((100.0 + 900.0 * u) * 100.0) / 100.0);
  }
  return out;
}

}  // namespace tcube
