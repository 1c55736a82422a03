#include "equihar/dataset.hpp"

// httplib pulls in system networking headers whose macros clash with Eigen
// declarations; keep it after the project headers.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <openssl/evp.h>
#include <zlib.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <thread>

namespace equihar {

namespace fs = std::filesystem;

Mat parse_inertial_file(const fs::path& path, Eigen::Index expected_cols) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const char* p = line.c_str();
    const char* end = p + line.size();
    Eigen::Index count = 0;
    while (p < end) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p >= end) break;
      char* next = nullptr;
      const double v = std::strtod(p, &next);
      if (next == p) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": unparseable token starting at '" +
                        std::string(p, std::min<std::size_t>(end - p, 12)) +
                        "'");
      }
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": non-finite value");
      }
      values.push_back(v);
      ++count;
      p = next;
    }
    if (count == 0) continue;  // blank line
    if (count != expected_cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(expected_cols) +
                      " values, got " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("empty file: " + path.string());
  Mat out(static_cast<Eigen::Index>(rows), expected_cols);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < expected_cols; ++c) {
      out(r, c) = values[static_cast<std::size_t>(r * expected_cols + c)];
    }
  }
  return out;
}

fs::path dataset_dir(const DatasetConfig& cfg) {
  const fs::path nested = cfg.root / "UCI HAR Dataset";
  return fs::is_directory(nested) ? nested : cfg.root;
}

namespace {

std::vector<std::string> signal_file_names(const DatasetConfig& cfg,
                                           Split split) {
  const std::string suffix = std::string(split_name(split)) + ".txt";
  const std::string acc = std::string(acc_variant_name(cfg.acc_variant));
  std::vector<std::string> names;
  for (const char* axis : {"x", "y", "z"}) {
    names.push_back(acc + "_acc_" + axis + "_" + suffix);
  }
  for (const char* axis : {"x", "y", "z"}) {
    names.push_back(std::string("body_gyro_") + axis + "_" + suffix);
  }
  return names;
}

fs::path split_dir(const DatasetConfig& cfg, Split split) {
  return dataset_dir(cfg) / split_name(split);
}

std::vector<int> parse_int_column(const fs::path& path, int lo, int hi,
                                  const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<int> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    int v = 0;
    try {
      v = std::stoi(line);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unparseable " + what);
    }
    if (v < lo || v > hi) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                      what + " " + std::to_string(v) + " outside " +
                      std::to_string(lo) + ".." + std::to_string(hi));
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

bool dataset_present(const DatasetConfig& cfg) {
  for (Split split : {Split::Train, Split::Test}) {
    const fs::path dir = split_dir(cfg, split);
    for (const auto& name : signal_file_names(cfg, split)) {
      if (!fs::is_regular_file(dir / "Inertial Signals" / name)) return false;
    }
    if (!fs::is_regular_file(
            dir / ("y_" + std::string(split_name(split)) + ".txt"))) {
      return false;
    }
  }
  return true;
}

HarSplit load_split(const DatasetConfig& cfg, Split split) {
  const fs::path dir = split_dir(cfg, split);
  const fs::path signals = dir / "Inertial Signals";
  const auto names = signal_file_names(cfg, split);

  std::vector<Mat> channels;
  channels.reserve(names.size());
  for (const auto& name : names) {
    const fs::path path = signals / name;
    if (!fs::is_regular_file(path)) {
      throw DataError("missing file: " + path.string());
    }
    channels.push_back(parse_inertial_file(path));
    if (channels.back().rows() != channels.front().rows()) {
      throw DataError("row-count mismatch: " + (signals / names[0]).string() +
                      " has " + std::to_string(channels.front().rows()) +
                      " rows but " + path.string() + " has " +
                      std::to_string(channels.back().rows()));
    }
  }

  const fs::path y_path = dir / ("y_" + std::string(split_name(split)) + ".txt");
  if (!fs::is_regular_file(y_path)) {
    throw DataError("missing file: " + y_path.string());
  }
  std::vector<int> labels = parse_int_column(y_path, 1, kNumClasses, "label");
  if (static_cast<Eigen::Index>(labels.size()) != channels[0].rows()) {
    throw DataError("row-count mismatch: " + y_path.string() + " has " +
                    std::to_string(labels.size()) + " labels but signals have " +
                    std::to_string(channels[0].rows()) + " rows");
  }

  HarSplit out;
  out.split = split;
  out.labels = std::move(labels);
  const Eigen::Index n = channels[0].rows();
  const Eigen::Index T = channels[0].cols();
  out.windows.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    MultiSensorWindow& w = out.windows[static_cast<std::size_t>(i)];
    for (SensorId s : kSensors) {
      TriAxialWindow block(3, T);
      const std::size_t base = 3 * sensor_index(s);
      for (int axis = 0; axis < 3; ++axis) {
        block.row(axis) = channels[base + static_cast<std::size_t>(axis)].row(i);
      }
      w.blocks[sensor_index(s)] = block;
    }
    w.label = out.labels[static_cast<std::size_t>(i)];
  }

  const fs::path subj_path =
      dir / ("subject_" + std::string(split_name(split)) + ".txt");
  if (fs::is_regular_file(subj_path)) {
    out.subjects = parse_int_column(subj_path, 1, 30, "subject id");
    if (out.subjects.size() != out.windows.size()) {
      throw DataError("row-count mismatch: " + subj_path.string());
    }
  }
  return out;
}

std::string sha256_hex(const void* data, std::size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * digest_len);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_DigestFinal_ex(ctx, digest, &digest_len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::map<std::string, std::string> dataset_checksums(const DatasetConfig& cfg) {
  std::map<std::string, std::string> out;
  for (Split split : {Split::Train, Split::Test}) {
    const fs::path dir = split_dir(cfg, split);
    for (const auto& name : signal_file_names(cfg, split)) {
      const fs::path p = dir / "Inertial Signals" / name;
      if (fs::is_regular_file(p)) out[name] = sha256_file(p);
    }
    const std::string y_name = "y_" + std::string(split_name(split)) + ".txt";
    const fs::path y = dir / y_name;
    if (fs::is_regular_file(y)) out[y_name] = sha256_file(y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ZIP extraction: central-directory walk, stored and deflate entries only.
// ---------------------------------------------------------------------------

namespace detail {

namespace {

std::uint16_t u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

bool safe_relative_path(const std::string& name) {
  if (name.empty() || name.front() == '/') return false;
  fs::path p(name);
  for (const auto& part : p) {
    if (part == "..") return false;
  }
  return true;
}

std::vector<unsigned char> inflate_raw(const unsigned char* src,
                                       std::size_t src_len,
                                       std::size_t expected_len) {
  std::vector<unsigned char> out(expected_len);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
    throw DataError("zip: inflateInit failed");
  }
  zs.next_in = const_cast<unsigned char*>(src);
  zs.avail_in = static_cast<uInt>(src_len);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected_len) {
    throw DataError("zip: corrupt deflate stream");
  }
  return out;
}

}  // namespace

void extract_zip(const fs::path& archive, const fs::path& dest) {
  std::ifstream in(archive, std::ios::binary);
  if (!in) throw DataError("cannot open archive: " + archive.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 22) throw DataError("zip: file too small");

  // End-of-central-directory record: signature 0x06054b50, within the last
  // 64KiB + 22 bytes (comment may follow).
  constexpr std::uint32_t kEocdSig = 0x06054b50;
  std::size_t eocd = std::string::npos;
  const std::size_t scan_start =
      bytes.size() > 65557 ? bytes.size() - 65557 : 0;
  for (std::size_t i = bytes.size() - 22 + 1; i-- > scan_start;) {
    if (u32(&bytes[i]) == kEocdSig) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) {
    throw DataError("zip: end-of-central-directory not found");
  }
  const std::uint16_t n_entries = u16(&bytes[eocd + 10]);
  const std::uint32_t cd_offset = u32(&bytes[eocd + 16]);

  std::size_t at = cd_offset;
  for (std::uint16_t e = 0; e < n_entries; ++e) {
    if (at + 46 > bytes.size() || u32(&bytes[at]) != 0x02014b50) {
      throw DataError("zip: corrupt central directory");
    }
    const std::uint16_t method = u16(&bytes[at + 10]);
    const std::uint32_t crc = u32(&bytes[at + 16]);
    const std::uint32_t comp_size = u32(&bytes[at + 20]);
    const std::uint32_t uncomp_size = u32(&bytes[at + 24]);
    const std::uint16_t name_len = u16(&bytes[at + 28]);
    const std::uint16_t extra_len = u16(&bytes[at + 30]);
    const std::uint16_t comment_len = u16(&bytes[at + 32]);
    const std::uint32_t local_offset = u32(&bytes[at + 42]);
    const std::string name(reinterpret_cast<const char*>(&bytes[at + 46]),
                           name_len);
    at += 46u + name_len + extra_len + comment_len;

    if (!safe_relative_path(name)) {
      throw DataError("zip: unsafe entry path: " + name);
    }
    const fs::path target = dest / fs::path(name);
    if (!name.empty() && name.back() == '/') {
      fs::create_directories(target);
      continue;
    }

    // The local header repeats name/extra with possibly different lengths.
    if (local_offset + 30 > bytes.size() ||
        u32(&bytes[local_offset]) != 0x04034b50) {
      throw DataError("zip: corrupt local header for " + name);
    }
    const std::uint16_t lh_name_len = u16(&bytes[local_offset + 26]);
    const std::uint16_t lh_extra_len = u16(&bytes[local_offset + 28]);
    const std::size_t data_at = local_offset + 30u + lh_name_len + lh_extra_len;
    if (data_at + comp_size > bytes.size()) {
      throw DataError("zip: truncated entry data for " + name);
    }

    std::vector<unsigned char> content;
    if (method == 0) {
      content.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_at),
                     bytes.begin() + static_cast<std::ptrdiff_t>(data_at + comp_size));
    } else if (method == 8) {
      content = inflate_raw(&bytes[data_at], comp_size, uncomp_size);
    } else {
      throw DataError("zip: unsupported compression method " +
                      std::to_string(method) + " for " + name);
    }
    const auto actual_crc =
        crc32(0, content.data(), static_cast<uInt>(content.size()));
    if (actual_crc != crc) {
      throw DataError("zip: CRC mismatch for " + name);
    }
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    if (!out) throw DataError("zip: cannot write " + target.string());
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
  }
}

bool download_url(const std::string& url, const fs::path& dest,
                  std::string* error) {
  std::string scheme, host, path = "/";
  int port = 0;
  std::size_t pos = url.find("://");
  if (pos == std::string::npos) {
    if (error) *error = "malformed URL: " + url;
    return false;
  }
  scheme = url.substr(0, pos);
  std::string rest = url.substr(pos + 3);
  pos = rest.find('/');
  if (pos != std::string::npos) {
    path = rest.substr(pos);
    rest = rest.substr(0, pos);
  }
  pos = rest.find(':');
  if (pos != std::string::npos) {
    port = std::atoi(rest.substr(pos + 1).c_str());
    host = rest.substr(0, pos);
  } else {
    host = rest;
    port = scheme == "https" ? 443 : 80;
  }
  if (scheme != "http" && scheme != "https") {
    if (error) *error = "unsupported scheme: " + scheme;
    return false;
  }

  std::ofstream out(dest, std::ios::binary);
  if (!out) {
    if (error) *error = "cannot write " + dest.string();
    return false;
  }
  const auto receiver = [&out](const char* data, std::size_t len) {
    out.write(data, static_cast<std::streamsize>(len));
    return static_cast<bool>(out);
  };

  httplib::Result res;
  if (scheme == "https") {
    httplib::SSLClient cli(host, port);
    cli.set_follow_location(true);
    cli.set_read_timeout(120, 0);
    res = cli.Get(path, receiver);
  } else {
    httplib::Client cli(host, port);
    cli.set_follow_location(true);
    cli.set_read_timeout(120, 0);
    res = cli.Get(path, receiver);
  }
  out.close();
  if (!res) {
    if (error) *error = "connection failed: " + httplib::to_string(res.error());
    return false;
  }
  if (res->status != 200) {
    if (error) *error = "HTTP status " + std::to_string(res->status);
    return false;
  }
  return true;
}

}  // namespace detail

void fetch_dataset(const DatasetConfig& cfg) {
  if (dataset_present(cfg)) {
    std::cout << "dataset already present under " << dataset_dir(cfg)
              << ", nothing to do\n";
    return;
  }
  if (cfg.download_url.empty()) {
    throw DataError("fetch: no download URL configured");
  }
  fs::create_directories(cfg.root);
  const fs::path archive = cfg.root / "uci_har_dataset.zip";

  if (!fs::is_regular_file(archive)) {
    std::string error;
    bool ok = false;
    for (int attempt = 1; attempt <= cfg.fetch_attempts; ++attempt) {
      std::cout << "downloading " << cfg.download_url << " (attempt "
                << attempt << "/" << cfg.fetch_attempts << ")\n";
      ok = detail::download_url(cfg.download_url, archive, &error);
      if (ok) break;
      std::cout << "  failed: " << error << "\n";
      fs::remove(archive);
      if (attempt < cfg.fetch_attempts) {
        std::this_thread::sleep_for(std::chrono::milliseconds(
            cfg.backoff_ms * (1L << (attempt - 1))));
      }
    }
    if (!ok) {
      throw DataError("fetch: download failed after " +
                      std::to_string(cfg.fetch_attempts) +
                      " attempts: " + error);
    }
  }

  const std::string digest = sha256_file(archive);
  std::cout << "archive sha256: " << digest << "\n";
  if (!cfg.sha256.empty() && digest != cfg.sha256) {
    fs::remove(archive);
    throw DataError("fetch: checksum mismatch (expected " + cfg.sha256 +
                    ", got " + digest + "); archive removed, nothing unpacked");
  }

  detail::extract_zip(archive, cfg.root);

  // Current UCI downloads wrap the dataset zip inside an outer zip.
  if (!dataset_present(cfg)) {
    std::vector<fs::path> inner;
    for (const auto& entry : fs::directory_iterator(cfg.root)) {
      if (entry.is_regular_file() && entry.path().extension() == ".zip" &&
          entry.path() != archive) {
        inner.push_back(entry.path());
      }
    }
    if (inner.size() == 1) {
      std::cout << "unpacking inner archive " << inner[0].filename() << "\n";
      detail::extract_zip(inner[0], cfg.root);
    }
  }

  if (!dataset_present(cfg)) {
    throw DataError(
        "fetch: archive unpacked but the expected UCI HAR layout was not "
        "found under " +
        cfg.root.string());
  }
  std::cout << "dataset ready under " << dataset_dir(cfg) << "\n";
}

}  // namespace equihar
