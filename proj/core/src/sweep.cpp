#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "config_internal.hpp"

namespace parsim {

namespace {

using detail::Json;

std::string cell(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

SweepReport sweep(const ScenarioConfig& base, std::string_view grid_json, const std::filesystem::path& out_dir,
                  unsigned threads) {
  Json grid;
  try {
    grid = Json::parse(grid_json.begin(), grid_json.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string{"grid: "} + e.what(), 0, "");
  }
  if (!grid.is_object()) throw ValidationError("grid is an object of JSON pointers to value lists");

  SweepReport report;
  std::vector<std::vector<Json>> axes;
  std::vector<std::pair<std::string, Json>> sorted;
  for (auto it = grid.begin(); it != grid.end(); ++it) sorted.emplace_back(it.key(), it.value());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, values] : sorted) {
    if (!values.is_array() || values.empty()) throw ValidationError("grid values are non-empty lists", key);
    try {
      (void)Json::json_pointer(key);
    } catch (const Json::exception&) {
      throw ValidationError("grid key is a JSON pointer", key);
    }
    report.keys.push_back(key);
    axes.emplace_back(values.begin(), values.end());
  }

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  const Json source = Json::parse(base.source_json);

  report.points.resize(total);
  std::vector<Json> patched(total);
  for (std::size_t n = 0; n < total; ++n) {
    SweepPoint& p = report.points[n];
    p.index = n;
    Json j = source;
    std::size_t rest = n;
    std::vector<std::size_t> pick(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      pick[k] = rest % axes[k].size();
      rest /= axes[k].size();
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const Json& v = axes[k][pick[k]];
      p.values.emplace_back(report.keys[k], cell(v));
      try {
        j[Json::json_pointer(report.keys[k])] = v;
      } catch (const Json::exception& e) {
        p.status = "invalid";
        p.message = e.what();
      }
    }
    patched[n] = std::move(j);
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t n = next++; n < total; n = next++) {
      SweepPoint& p = report.points[n];
      if (p.status != "ok") continue;
      try {
        const ScenarioConfig cfg = detail::config_from_json(patched[n]);
        RunOutput out = run(cfg);
        char name[16];
        std::snprintf(name, sizeof name, "%04zu", n);
        write_outputs(out, out_dir / "points" / name);
        p.summary = std::move(out.summary);
      } catch (const ValidationError& e) {
        p.status = "invalid";
        p.message = e.what();
      } catch (const ParseError& e) {
        p.status = "invalid";
        p.message = e.what();
      } catch (const AuditFailure& e) {
        p.status = "audit_failed";
        p.message = e.what();
      } catch (const IoError& e) {
        p.status = "io_error";
        p.message = e.what();
      } catch (const std::exception& e) {
        p.status = "error";
        p.message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "point";
  for (const auto& k : report.keys) csv << ',' << csv_escape(k);
  csv << ",status,peak_deviation_bp,max_delay_days,delayed_total,min_capacity,srf_draws,insolvency_day\n";
  for (const auto& p : report.points) {
    csv << p.index;
    for (const auto& [k, v] : p.values) csv << ',' << csv_escape(v);
    csv << ',' << p.status;
    if (!p.summary) {
      csv << ",,,,,,\n";
      continue;
    }
    const RunSummary& s = *p.summary;
    std::int64_t peak = 0;
    int delay = 0;
    std::optional<int> insolvent;
    for (const auto& is : s.issuers) {
      peak = std::max(peak, is.peak_deviation_bp);
      delay = std::max(delay, is.max_delay_days);
      if (is.insolvency_day && (!insolvent || *is.insolvency_day < *insolvent)) insolvent = is.insolvency_day;
    }
    csv << ',' << peak << ',' << delay << ',' << base.unit.format(s.delayed_total) << ','
        << base.unit.format(s.min_capacity) << ',' << base.unit.format(s.srf_draws) << ','
        << (insolvent ? std::to_string(*insolvent) : "") << '\n';
  }
  report.matrix_csv = csv.str();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::ofstream f(out_dir / "sweep.csv", std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + (out_dir / "sweep.csv").string());
  f << report.matrix_csv;
  return report;
}

}  // namespace parsim
