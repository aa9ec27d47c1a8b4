#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "grasp/geometry.hpp"
#include "grasp/image.hpp"

namespace grasp {

// One self-labeled grasp attempt. The labels live in the filename, not the
// pixels: "<success>_<class>_train_img_<gc>.pgm".
struct DataPoint {
  Image patch;              // the classifier input stored on disk
  AngleClass attempted{0};  // class whose grasp was executed
  bool success = false;
  std::int64_t gc = 0;   // grasp counter, unique within a directory
};

struct DatasetStats {
  std::int64_t successful = 0;
  std::int64_t unsuccessful = 0;
  std::int64_t total = 0;

  double success_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(successful) / total;
  }
};

inline constexpr const char* kDefaultImageExt = ".pgm";
inline constexpr const char* kGcFileName = "gc_file.txt";

// "train_img_<gc>.pgm" - the name an attempt carries before feedback.
std::string provisional_name(std::int64_t gc,
                             const std::string& ext = kDefaultImageExt);

// "<success>_<classIndex>_train_img_<gc>.pgm" - labels prefixed after
// feedback, class index 0..17 rather than degrees.
std::string finalize_name(std::int64_t gc, AngleClass attempted, bool success,
                          const std::string& ext = kDefaultImageExt);

struct ParsedName {
  bool finalized = false;
  std::int64_t gc = 0;
  int attempted = 0;  // meaningful only when finalized
  int success = 0;    // meaningful only when finalized
};

// Strict grammar; anything else throws ParseError naming the violated part.
ParsedName parse_name(const std::string& filename,
                      const std::string& ext = kDefaultImageExt);

// Writes the provisional image for counter gc. Errors if any file for gc
// (provisional or finalized) already exists.
void write_point(const std::filesystem::path& dir, const Image& patch,
                 std::int64_t gc, const std::string& ext = kDefaultImageExt);

// Atomic rename provisional -> finalized. Errors if the provisional file is
// missing (feedback without a capture) or gc was already finalized.
void finalize_point(const std::filesystem::path& dir, std::int64_t gc,
                    AngleClass attempted, bool success,
                    const std::string& ext = kDefaultImageExt);

struct LoadReport {
  std::vector<DataPoint> points;          // sorted by gc ascending
  std::vector<std::string> warnings;      // skipped provisionals, bad names
  std::vector<std::string> errors;        // undecodable images, duplicate gc
};

// Loads every finalized point; provisional leftovers and malformed names are
// skipped with warnings, undecodable images collected as per-file errors.
LoadReport load_dataset(const std::filesystem::path& dir,
                        const std::string& ext = kDefaultImageExt);

DatasetStats stats(const std::vector<DataPoint>& points);

// Reads/writes the persistent grasp counter file (ASCII decimal).
void write_gc_file(const std::filesystem::path& dir, std::int64_t gc);
// Returns -1 when the file is absent.
std::int64_t read_gc_file(const std::filesystem::path& dir);

// Owns the counter for one dataset directory: restores it at startup from
// gc_file.txt and the existing filenames so counters never collide across
// sessions, then hands out fresh values.
class DatasetWriter {
 public:
  explicit DatasetWriter(std::filesystem::path dir,
                         std::string ext = kDefaultImageExt);

  std::int64_t next_gc() const { return next_gc_; }
  // Counter of the most recent begin_point; -1 before the first one.
  std::int64_t current_gc() const { return current_gc_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Provisional write; consumes and returns the next counter. A point left
  // unfinished keeps its number, so an abandoned capture never collides.
  std::int64_t begin_point(const Image& patch);
  // Finalize and persist the counter file.
  void finish_point(std::int64_t gc, AngleClass attempted, bool success);

 private:
  std::filesystem::path dir_;
  std::string ext_;
  std::int64_t next_gc_ = 0;
  std::int64_t current_gc_ = -1;
};

}  // namespace grasp
