#pragma once

// Download registry datasets into a cache directory (libcurl), inflating
// bzip2 archives on the way (Boost.Iostreams). Link with aisarah::fetch.

#include <curl/curl.h>

#include <boost/iostreams/copy.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "aisarah/datasets.hpp"

namespace aisarah {

class FetchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes the resource at `url` to `dest`; throws FetchError on failure.
using Transport = std::function<void(const std::string& url, const std::filesystem::path& dest)>;

inline void curl_download(const std::string& url, const std::filesystem::path& dest) {
  static const bool initialized = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
  if (!initialized) throw FetchError("libcurl initialization failed");

  std::FILE* file = std::fopen(dest.c_str(), "wb");
  if (!file) throw FetchError("cannot write " + dest.string());
  CURL* handle = curl_easy_init();
  if (!handle) {
    std::fclose(file);
    throw FetchError("libcurl handle creation failed");
  }
  char error[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(handle, CURLOPT_URL, url.c_str());
  curl_easy_setopt(handle, CURLOPT_WRITEDATA, file);
  curl_easy_setopt(handle, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(handle, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(handle, CURLOPT_CONNECTTIMEOUT, 30L);
  curl_easy_setopt(handle, CURLOPT_ERRORBUFFER, error);
  const CURLcode rc = curl_easy_perform(handle);
  curl_easy_cleanup(handle);
  std::fclose(file);
  if (rc != CURLE_OK) {
    std::filesystem::remove(dest);
    throw FetchError("download failed for " + url + ": " + (error[0] ? error : curl_easy_strerror(rc)));
  }
}

inline void bunzip2_file(const std::filesystem::path& src, const std::filesystem::path& dest) {
  std::ifstream in(src, std::ios::binary);
  std::ofstream out(dest, std::ios::binary);
  if (!in || !out) throw FetchError("cannot decompress " + src.string());
  boost::iostreams::filtering_istream fin;
  fin.push(boost::iostreams::bzip2_decompressor());
  fin.push(in);
  try {
    boost::iostreams::copy(fin, out);
  } catch (const std::exception& e) {
    throw FetchError("bzip2 decompression of " + src.string() + " failed: " + e.what());
  }
}

struct FetchResult {
  std::filesystem::path train;
  std::optional<std::filesystem::path> test;
  /// Number of files actually downloaded; 0 when everything was cached.
  std::size_t downloads = 0;
};

/// DATA_DIR if set, else ./data.
inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("DATA_DIR"); env && *env) return env;
  return "data";
}

namespace detail {

inline std::filesystem::path fetch_file(std::string_view remote, const std::filesystem::path& dir,
                                        const Transport& transport, std::size_t& downloads) {
  const auto target = dir / local_name(remote);
  if (std::filesystem::exists(target)) return target;
  const std::string url = std::string(libsvm_binary_url) + std::string(remote);
  const bool compressed = local_name(remote) != remote;
  const auto partial = dir / (std::string(remote) + ".part");
  const auto inflated = dir / (local_name(remote) + ".part");
  try {
    transport(url, partial);
    ++downloads;
    if (compressed) {
      bunzip2_file(partial, inflated);
      std::filesystem::remove(partial);
      std::filesystem::rename(inflated, target);
    } else {
      std::filesystem::rename(partial, target);
    }
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(partial, ignored);
    std::filesystem::remove(inflated, ignored);
    throw;
  }
  return target;
}

}  // namespace detail

/// Ensure the dataset's files are in `dir`, downloading only what is missing.
inline FetchResult fetch(std::string_view name, const std::filesystem::path& dir,
                         const Transport& transport = curl_download) {
  const DatasetInfo* info = find_dataset(name);
  if (!info) throw FetchError("unknown dataset '" + std::string(name) + "'; valid names: " + dataset_names());
  std::filesystem::create_directories(dir);
  FetchResult out;
  out.train = detail::fetch_file(info->train_remote, dir, transport, out.downloads);
  if (info->official_split()) out.test = detail::fetch_file(info->test_remote, dir, transport, out.downloads);
  return out;
}

}  // namespace aisarah
