#include <gtest/gtest.h>

#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aisarah/fetch.hpp"

namespace fs = std::filesystem;
using namespace aisarah;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("aisarah-fetch-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string bzip2(const std::string& text) {
  std::ostringstream out;
  {
    boost::iostreams::filtering_ostream f;
    f.push(boost::iostreams::bzip2_compressor());
    f.push(out);
    f << text;
  }
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Fetch, DownloadsOnceThenUsesCache) {
  TempDir dir;
  std::vector<std::string> urls;
  Transport fake = [&](const std::string& url, const fs::path& dest) {
    urls.push_back(url);
    std::ofstream(dest) << "+1 1:1\n-1 2:1\n";
  };
  const auto first = fetch("a1a", dir.path, fake);
  EXPECT_EQ(first.downloads, 2u);
  ASSERT_EQ(urls.size(), 2u);
  EXPECT_EQ(urls[0], std::string(libsvm_binary_url) + "a1a");
  EXPECT_EQ(urls[1], std::string(libsvm_binary_url) + "a1a.t");
  EXPECT_EQ(first.train, dir.path / "a1a");
  ASSERT_TRUE(first.test);

  const auto second = fetch("a1a", dir.path, fake);
  EXPECT_EQ(second.downloads, 0u);
  EXPECT_EQ(urls.size(), 2u);
  EXPECT_EQ(second.train, first.train);
}

TEST(Fetch, InflatesBzip2Archives) {
  TempDir dir;
  const std::string text = "1 1:0.5 3:2\n2 2:1\n";
  Transport fake = [&](const std::string& url, const fs::path& dest) {
    EXPECT_EQ(url.substr(url.size() - 4), ".bz2");
    std::ofstream(dest, std::ios::binary) << bzip2(text);
  };
  const auto got = fetch("ijcnn1", dir.path, fake);
  EXPECT_EQ(got.downloads, 2u);
  EXPECT_EQ(got.train.filename(), "ijcnn1");
  EXPECT_EQ(slurp(got.train), text);
  EXPECT_EQ(slurp(*got.test), text);
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    EXPECT_NE(entry.path().extension(), ".part") << entry.path();
    EXPECT_NE(entry.path().extension(), ".bz2") << entry.path();
  }
}

TEST(Fetch, Errors) {
  TempDir dir;
  try {
    fetch("nonexistent", dir.path, [](const std::string&, const fs::path&) { FAIL(); });
    FAIL();
  } catch (const FetchError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("nonexistent"), std::string::npos);
    EXPECT_NE(msg.find("mushrooms"), std::string::npos);
    EXPECT_NE(msg.find("real-sim"), std::string::npos);
  }

  try {
    curl_download("http://127.0.0.1:9/none", dir.path / "x");
    FAIL();
  } catch (const FetchError& e) {
    EXPECT_NE(std::string(e.what()).find("http://127.0.0.1:9/none"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(dir.path / "x"));

  Transport broken = [](const std::string& url, const fs::path&) { throw FetchError("download failed for " + url); };
  EXPECT_THROW(fetch("mushrooms", dir.path, broken), FetchError);
  EXPECT_FALSE(fs::exists(dir.path / "mushrooms"));
}

TEST(Fetch, CorruptArchiveIsReported) {
  TempDir dir;
  Transport fake = [](const std::string&, const fs::path& dest) { std::ofstream(dest) << "not bzip2"; };
  EXPECT_THROW(fetch("news20", dir.path, fake), FetchError);
  EXPECT_FALSE(fs::exists(dir.path / "news20.binary"));
}

TEST(Registry, LoadsLocalFilesWithSplit) {
  TempDir dir;
  std::ofstream out(dir.path / "mushrooms");
  for (int i = 0; i < 40; ++i) out << (i % 3 ? 1 : 2) << ' ' << (i % 5 + 1) << ":1\n";
  out.close();
  const auto a = load_registered(*find_dataset("mushrooms"), dir.path);
  const auto b = load_registered(*find_dataset("mushrooms"), dir.path);
  EXPECT_EQ(a.train.n(), 30u);
  ASSERT_TRUE(a.test);
  EXPECT_EQ(a.test->n(), 10u);
  EXPECT_EQ(a.train.d, 113u);  // declared 112 raw features + bias
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_EQ(a.train.values(), b.train.values());
}
