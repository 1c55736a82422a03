#pragma once

#include "equihar/features.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace equihar {

enum class Split { Train, Test };
enum class AccVariant { Body, Total };

constexpr std::string_view split_name(Split s) {
  return s == Split::Train ? "train" : "test";
}
constexpr std::string_view acc_variant_name(AccVariant v) {
  return v == AccVariant::Body ? "body" : "total";
}

/// Malformed or missing data; the CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  std::filesystem::path root = "data";
  AccVariant acc_variant = AccVariant::Body;
  std::string download_url =
      "https://archive.ics.uci.edu/ml/machine-learning-databases/00240/"
      "UCI%20HAR%20Dataset.zip";
  /// Expected SHA-256 of the archive (hex). When set, a mismatch refuses to
  /// unpack; when empty, the computed digest is only reported.
  std::string sha256;
  int fetch_attempts = 3;
  int backoff_ms = 1000;
};

/// One official split, fully materialized and validated.
struct HarSplit {
  std::vector<MultiSensorWindow> windows;
  std::vector<int> labels;    // mirrors windows[i].label
  std::vector<int> subjects;  // parsed when the subject file exists; unused
  Split split = Split::Train;
};

/// Parses one Inertial Signals file: every nonempty line must hold exactly
/// `expected_cols` finite whitespace-separated reals. Errors carry the
/// offending line number.
Mat parse_inertial_file(const std::filesystem::path& path,
                        Eigen::Index expected_cols = kDefaultWindowLength);

/// Directory holding train/ and test/: cfg.root/"UCI HAR Dataset" when that
/// exists, else cfg.root itself.
std::filesystem::path dataset_dir(const DatasetConfig& cfg);
bool dataset_present(const DatasetConfig& cfg);

/// Loads and zips the 6 signal files plus labels. Throws DataError on a
/// missing file, a row-count mismatch between any pair of files, or a label
/// outside 1..6.
HarSplit load_split(const DatasetConfig& cfg, Split split);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file(const std::filesystem::path& path);

/// filename -> SHA-256 for the files load_split would read (both splits).
std::map<std::string, std::string> dataset_checksums(const DatasetConfig& cfg);

/// Download + checksum + unpack under cfg.root. No-op when the dataset is
/// already present and valid. Retries the download cfg.fetch_attempts times
/// with exponential backoff.
void fetch_dataset(const DatasetConfig& cfg);

namespace detail {

/// Minimal ZIP extraction (stored + deflate entries) with CRC validation and
/// path traversal checks.
void extract_zip(const std::filesystem::path& archive,
                 const std::filesystem::path& dest);

/// Plain GET supporting http:// and https:// URLs; returns false and fills
/// `error` on failure.
bool download_url(const std::string& url, const std::filesystem::path& dest,
                  std::string* error);

}  // namespace detail

}  // namespace equihar
