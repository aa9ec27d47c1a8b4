#include "grasp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <system_error>

#include "grasp/errors.hpp"

namespace grasp {
namespace fs = std::filesystem;

namespace {

constexpr const char* kStem = "train_img_";

bool parse_int64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Probes every name counter gc could live under.
bool gc_taken(const fs::path& dir, std::int64_t gc, const std::string& ext) {
  if (fs::exists(dir / provisional_name(gc, ext))) return true;
  for (int s = 0; s < 2; ++s)
    for (int c = 0; c < kNumAngleClasses; ++c)
      if (fs::exists(dir / finalize_name(gc, AngleClass(c), s == 1, ext)))
        return true;
  return false;
}

}  // namespace

std::string provisional_name(std::int64_t gc, const std::string& ext) {
  if (gc < 0) throw DomainError("grasp counter must be non-negative");
  return kStem + std::to_string(gc) + ext;
}

std::string finalize_name(std::int64_t gc, AngleClass attempted, bool success,
                          const std::string& ext) {
  return std::string(success ? "1" : "0") + "_" +
         std::to_string(attempted.index()) + "_" + provisional_name(gc, ext);
}

ParsedName parse_name(const std::string& filename, const std::string& ext) {
  auto fail = [&](const char* why) {
    throw ParseError(std::string("dataset filename: ") + why, filename);
  };
  if (filename.size() <= ext.size() ||
      filename.compare(filename.size() - ext.size(), ext.size(), ext) != 0)
    fail("missing image extension");
  std::string body = filename.substr(0, filename.size() - ext.size());

  ParsedName out;
  auto stem_pos = body.find(kStem);
  if (stem_pos == std::string::npos) fail("missing train_img_ stem");

  std::string digits = body.substr(stem_pos + std::string(kStem).size());
  if (digits.empty() ||
      digits.find_first_not_of("0123456789") != std::string::npos ||
      !parse_int64(digits, out.gc))
    fail("counter is not a decimal integer");

  std::string prefix = body.substr(0, stem_pos);
  if (prefix.empty()) {
    out.finalized = false;
    return out;
  }

  // "<s>_<c>_" with s in {0,1} and c in 0..17, no padding.
  if (prefix.size() < 4 || prefix[1] != '_' || prefix.back() != '_')
    fail("label prefix is not <success>_<class>_");
  if (prefix[0] != '0' && prefix[0] != '1') fail("success flag must be 0 or 1");
  std::string cls = prefix.substr(2, prefix.size() - 3);
  std::int64_t c = 0;
  if (cls.empty() || cls.find_first_not_of("0123456789") != std::string::npos ||
      !parse_int64(cls, c) || (cls.size() > 1 && cls[0] == '0'))
    fail("class index is not a decimal integer");
  if (c < 0 || c >= kNumAngleClasses) fail("class index out of range 0..17");

  out.finalized = true;
  out.success = prefix[0] - '0';
  out.attempted = static_cast<int>(c);
  return out;
}

void write_point(const fs::path& dir, const Image& patch, std::int64_t gc,
                 const std::string& ext) {
  if (!fs::is_directory(dir))
    throw DataError("dataset directory does not exist: " + dir.string());
  if (gc_taken(dir, gc, ext))
    throw DataError("grasp counter " + std::to_string(gc) +
                    " already used in " + dir.string());
  write_pgm(dir / provisional_name(gc, ext), patch);
}

void finalize_point(const fs::path& dir, std::int64_t gc, AngleClass attempted,
                    bool success, const std::string& ext) {
  fs::path from = dir / provisional_name(gc, ext);
  fs::path to = dir / finalize_name(gc, attempted, success, ext);
  if (!fs::exists(from)) {
    if (fs::exists(to))
      throw DataError("grasp counter " + std::to_string(gc) +
                      " already finalized");
    throw DataError("no provisional image for grasp counter " +
                    std::to_string(gc));
  }
  std::error_code ec;
  fs::rename(from, to, ec);
  if (ec)
    throw DataError("finalize rename failed for counter " +
                    std::to_string(gc) + ": " + ec.message());
}

LoadReport load_dataset(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir))
    throw DataError("dataset directory does not exist: " + dir.string());

  LoadReport report;
  std::set<std::int64_t> seen;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    if (e.path().extension() != ext) continue;  // gc_file.txt and friends
    entries.push_back(e.path());
  }
  std::sort(entries.begin(), entries.end());

  for (const auto& path : entries) {
    std::string name = path.filename().string();
    ParsedName parsed;
    try {
      parsed = parse_name(name, ext);
    } catch (const ParseError& err) {
      report.warnings.push_back(std::string(err.what()));
      continue;
    }
    if (!parsed.finalized) {
      report.warnings.push_back("provisional image skipped: " + name);
      continue;
    }
    if (!seen.insert(parsed.gc).second) {
      report.errors.push_back("duplicate grasp counter " +
                              std::to_string(parsed.gc) + ": " + name);
      continue;
    }
    DataPoint point;
    try {
      point.patch = read_pgm(path);
    } catch (const std::exception& err) {
      report.errors.push_back(name + ": " + err.what());
      continue;
    }
    point.attempted = AngleClass(parsed.attempted);
    point.success = parsed.success != 0;
    point.gc = parsed.gc;
    report.points.push_back(std::move(point));
  }

  std::sort(report.points.begin(), report.points.end(),
            [](const DataPoint& a, const DataPoint& b) { return a.gc < b.gc; });
  return report;
}

DatasetStats stats(const std::vector<DataPoint>& points) {
  DatasetStats s;
  for (const auto& p : points)
    p.success ? ++s.successful : ++s.unsuccessful;
  s.total = s.successful + s.unsuccessful;
  return s;
}

void write_gc_file(const fs::path& dir, std::int64_t gc) {
  fs::path tmp = dir / (std::string(kGcFileName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << gc;
    if (!out) throw DataError("cannot write " + (dir / kGcFileName).string());
  }
  std::error_code ec;
  fs::rename(tmp, dir / kGcFileName, ec);
  if (ec)
    throw DataError("cannot write " + (dir / kGcFileName).string() + ": " +
                    ec.message());
}

std::int64_t read_gc_file(const fs::path& dir) {
  std::ifstream in(dir / kGcFileName, std::ios::binary);
  if (!in) return -1;
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
    text.pop_back();
  std::int64_t value = 0;
  if (!parse_int64(text, value) || value < 0)
    throw DataError("malformed grasp counter file in " + dir.string());
  return value;
}

DatasetWriter::DatasetWriter(fs::path dir, std::string ext)
    : dir_(std::move(dir)), ext_(std::move(ext)) {
  fs::create_directories(dir_);
  std::int64_t last = read_gc_file(dir_);
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (!e.is_regular_file() || e.path().extension() != ext_) continue;
    try {
      last = std::max(last, parse_name(e.path().filename().string(), ext_).gc);
    } catch (const ParseError&) {
    }
  }
  next_gc_ = last + 1;
}

std::int64_t DatasetWriter::begin_point(const Image& patch) {
  std::int64_t gc = next_gc_;
  write_point(dir_, patch, gc, ext_);
  current_gc_ = gc;
  ++next_gc_;
  return gc;
}

void DatasetWriter::finish_point(std::int64_t gc, AngleClass attempted,
                                 bool success) {
  finalize_point(dir_, gc, attempted, success, ext_);
  write_gc_file(dir_, gc);
  next_gc_ = std::max(next_gc_, gc + 1);
}

}  // namespace grasp
