#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ssaa/experiments.hpp"
#include "ssaa/rng.hpp"

namespace ssaa {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string row_error(std::size_t row, const std::string& what) {
  return "row " + std::to_string(row) + ": " + what;
}

}  // namespace

int parse_iso_date(const std::string& date) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
    throw Error(ErrorCode::ParseError, "bad date '" + date + "'");
  }
  auto number = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto* first = date.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, out);
    if (ec != std::errc{} || ptr != first + len) throw Error(ErrorCode::ParseError, "bad date '" + date + "'");
  };
  number(0, 4, y);
  number(5, 2, m);
  number(8, 2, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw Error(ErrorCode::ParseError, "bad date '" + date + "'");
  return static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::string format_iso_date(int days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int weekday(int days) {
  // 1970-01-01 was a Thursday.
  return ((days % 7) + 7 + 3) % 7;
}

int month_of(int days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

std::vector<StoreSeries> parse_demand_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, row_error(1, "missing header"));
  const auto header = split_commas(line);
  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::ParseError, row_error(1, "header lacks column " + name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_store = column("store_id");
  const std::size_t c_date = column("date");
  const std::size_t c_demand = column("demand");

  std::vector<StoreSeries> stores;
  std::unordered_map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError, row_error(row, "expected " + std::to_string(header.size()) + " fields"));
    }
    const std::string& id = fields[c_store];
    if (id.empty()) throw Error(ErrorCode::ParseError, row_error(row, "empty store_id"));
    int day = 0;
    try {
      day = parse_iso_date(fields[c_date]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, row_error(row, "bad date '" + fields[c_date] + "'"));
    }
    double demand = 0.0;
    const auto& f = fields[c_demand];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), demand);
    if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(demand) || demand < 0.0) {
      throw Error(ErrorCode::ParseError, row_error(row, "demand must be a nonnegative number, got '" + f + "'"));
    }
    auto [it, inserted] = index.try_emplace(id, stores.size());
    if (inserted) stores.push_back(StoreSeries{id, {}, {}});
    auto& s = stores[it->second];
    if (!s.days.empty() && day <= s.days.back()) {
      throw Error(ErrorCode::NonMonotoneDates, row_error(row, "dates for store " + id + " are not increasing"));
    }
    s.days.push_back(day);
    s.demand.push_back(demand);
  }
  return stores;
}

std::vector<StoreSeries> read_demand_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_demand_csv(buf.str());
}

std::vector<StoreSeries> clean_series(std::vector<StoreSeries> stores, const CleaningOptions& options) {
  auto keep_if = [](StoreSeries& s, auto pred) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < s.days.size(); ++i) {
      if (pred(s.days[i])) {
        s.days[out] = s.days[i];
        s.demand[out] = s.demand[i];
        ++out;
      }
    }
    s.days.resize(out);
    s.demand.resize(out);
  };
  if (options.drop_weekends) {
    for (auto& s : stores) keep_if(s, [](int day) { return weekday(day) < 5; });
  }
  if (options.detrend_linear) {
    double sxy = 0.0;
    double sxx = 0.0;
    std::vector<double> mean_t(stores.size(), 0.0);
    for (std::size_t k = 0; k < stores.size(); ++k) {
      const auto& s = stores[k];
      if (s.days.empty()) continue;
      const double n = static_cast<double>(s.days.size());
      double mt = 0.0;
      double my = 0.0;
      for (std::size_t i = 0; i < s.days.size(); ++i) {
        mt += s.days[i];
        my += s.demand[i];
      }
      mt /= n;
      my /= n;
      mean_t[k] = mt;
      for (std::size_t i = 0; i < s.days.size(); ++i) {
        sxy += (s.days[i] - mt) * (s.demand[i] - my);
        sxx += (s.days[i] - mt) * (s.days[i] - mt);
      }
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    for (std::size_t k = 0; k < stores.size(); ++k) {
      auto& s = stores[k];
      for (std::size_t i = 0; i < s.days.size(); ++i) {
        s.demand[i] = std::max(0.0, s.demand[i] - slope * (s.days[i] - mean_t[k]));
      }
    }
  }
  if (!options.drop_months.empty()) {
    for (auto& s : stores) {
      keep_if(s, [&](int day) {
        return std::find(options.drop_months.begin(), options.drop_months.end(), month_of(day)) ==
               options.drop_months.end();
      });
    }
  }
  return stores;
}

std::size_t Discretization::bin(double v) const {
  const std::size_t d = support.size();
  if (degenerate || d == 1) return 0;
  const double raw = std::floor(static_cast<double>(d) * (v - lo) / (hi - lo));
  if (!(raw > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(raw), d - 1);
}

Counts Discretization::counts(std::span<const double> values) const {
  std::vector<std::int64_t> m(support.size(), 0);
  for (double v : values) ++m[bin(v)];
  return Counts(std::move(m));
}

Discretization discretize(std::span<const double> series, std::size_t d) {
  if (series.empty()) throw Error(ErrorCode::InsufficientData, "cannot discretize an empty series");
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "need at least two bins");
  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
  Discretization out;
  out.lo = *mn;
  out.hi = *mx;
  if (out.hi == out.lo) {
    out.degenerate = true;
    out.support = {out.lo};
    return out;
  }
  const double width = (out.hi - out.lo) / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) out.support.push_back(out.lo + (static_cast<double>(i) + 0.5) * width);
  return out;
}

std::vector<StoreSeries> synthetic_stores(std::size_t stores, std::size_t days, std::uint64_t seed) {
  const int start = parse_iso_date("2013-01-01");
  constexpr double kWeekly[7] = {1.15, 1.0, 0.95, 0.97, 1.05, 0.85, 0.45};
  std::vector<StoreSeries> out(stores);
  for (std::size_t k = 0; k < stores; ++k) {
    Rng rng(seed, k, 0, Purpose::Store);
    auto& s = out[k];
    s.id = std::to_string(k + 1);
    const double level = rng.uniform(3000.0, 23000.0);
    const double noise = rng.uniform(0.08, 0.25);
    const double promo_lift = rng.uniform(0.15, 0.45);
    const double trend = rng.uniform(0.0, 0.06) / 365.0;  // relative growth per day
    const double december = rng.uniform(1.1, 1.4);
    const bool gap = rng.uniform() < 0.15;  // some stores lose half a year of records
    const auto gap_start = static_cast<std::size_t>(rng.uniform(0.3, 0.6) * static_cast<double>(days));
    for (std::size_t t = 0; t < days; ++t) {
      const int day = start + static_cast<int>(t);
      const bool missing = (gap && t >= gap_start && t < gap_start + 184) || rng.uniform() < 0.01;
      const bool promo = weekday(day) < 5 && rng.uniform() < 0.4;
      const double eps = rng.normal();
      if (missing) continue;
      double v = level * kWeekly[weekday(day)] * (1.0 + trend * static_cast<double>(t));
      if (promo) v *= 1.0 + promo_lift;
      if (month_of(day) == 12) v *= december;
      v *= std::exp(noise * eps - 0.5 * noise * noise);
      s.days.push_back(day);
      s.demand.push_back(std::round(v));
    }
  }
  return out;
}

std::string demand_csv(const std::vector<StoreSeries>& stores) {
  std::string out = "store_id,date,demand\n";
  for (const auto& s : stores) {
    for (std::size_t i = 0; i < s.days.size(); ++i) {
      out += s.id;
      out += ',';
      out += format_iso_date(s.days[i]);
      out += ',';
      out += format_number(s.demand[i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace ssaa
