#include <fstream>
#include <system_error>

#include "parsim/scenario.hpp"

namespace parsim {

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_outputs(const RunOutput& out, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "daily.csv", out.daily_csv);
  write_file(dir / "analytics.csv", out.analytics_csv);
  write_file(dir / "market.csv", out.market_csv);
  write_file(dir / "summary.json", out.summary_json);
  write_file(dir / "events.jsonl", out.events_jsonl);
}

}  // namespace parsim
