#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "aisarah/datasets.hpp"
#include "aisarah/sparse_dataset.hpp"
#include "aisarah/synthetic.hpp"

using namespace aisarah;

TEST(ParseLibsvm, SingleRow) {
  const auto raw = parse_libsvm("+1 3:0.25 7:0.5\n");
  ASSERT_EQ(raw.n(), 1u);
  EXPECT_EQ(raw.labels[0], 1.0);
  EXPECT_EQ(raw.max_feature_index, 7u);
  const auto r = raw.rows.row(0);
  ASSERT_EQ(r.nnz(), 2u);
  EXPECT_EQ(r.indices[0], 2u);
  EXPECT_EQ(r.values[0], 0.25);
  EXPECT_EQ(r.indices[1], 6u);
  EXPECT_EQ(r.values[1], 0.5);
}

TEST(ParseLibsvm, LabelOnlyRow) {
  const auto raw = parse_libsvm("-1\n");
  ASSERT_EQ(raw.n(), 1u);
  EXPECT_EQ(raw.labels[0], -1.0);
  EXPECT_EQ(raw.rows.row(0).nnz(), 0u);
  EXPECT_EQ(raw.max_feature_index, 0u);
}

TEST(ParseLibsvm, SkipsBlankAndCommentLines) {
  const auto raw = parse_libsvm("# header\n\n1 1:2\n  \n0 2:1 # trailing\n");
  ASSERT_EQ(raw.n(), 2u);
  EXPECT_EQ(raw.labels[1], 0.0);
  EXPECT_EQ(raw.rows.row(1).nnz(), 1u);
}

TEST(ParseLibsvm, ErrorsNameTheLine) {
  auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_libsvm(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("1 1:1\n1 2:x\n"), 2u);
  EXPECT_EQ(line_of("1 3:1 2:1\n"), 1u);
  EXPECT_EQ(line_of("1 3:1 3:2\n"), 1u);
  EXPECT_EQ(line_of("1 1:1\nabc 1:1\n"), 2u);
  EXPECT_EQ(line_of("1 0:1\n"), 1u);
  EXPECT_EQ(line_of("1 2\n"), 1u);
  EXPECT_THROW(parse_libsvm(""), DataError);
  EXPECT_THROW(parse_libsvm("# only a comment\n"), DataError);
}

TEST(Preprocess, UnitRowsBiasAndLabelMap) {
  const auto raw = parse_libsvm("1 1:3 2:4\n2 1:1\n");
  const auto data = preprocess(raw);
  EXPECT_EQ(data.d, 3u);
  const auto r = data.row(0);
  ASSERT_EQ(r.nnz(), 3u);
  EXPECT_DOUBLE_EQ(r.values[0], 0.6);
  EXPECT_DOUBLE_EQ(r.values[1], 0.8);
  EXPECT_EQ(r.indices[2], 2u);
  EXPECT_EQ(r.values[2], 1.0);
  EXPECT_EQ(data.labels[0], -1.0);
  EXPECT_EQ(data.labels[1], 1.0);
}

TEST(Preprocess, ZeroRowKeepsBiasOnly) {
  const auto data = preprocess(parse_libsvm("1\n-1 2:5\n"));
  ASSERT_EQ(data.n(), 2u);
  const auto r = data.row(0);
  ASSERT_EQ(r.nnz(), 1u);
  EXPECT_EQ(r.indices[0], data.d - 1);
  EXPECT_EQ(r.values[0], 1.0);
}

TEST(Preprocess, LabelEncodings) {
  EXPECT_EQ(preprocess(parse_libsvm("0 1:1\n1 1:1\n")).labels, (std::vector<double>{-1, 1}));
  EXPECT_EQ(preprocess(parse_libsvm("-1 1:1\n+1 1:1\n")).labels, (std::vector<double>{-1, 1}));
  EXPECT_THROW(preprocess(parse_libsvm("1 1:1\n2 1:1\n3 1:1\n")), DataError);
  EXPECT_THROW(preprocess(parse_libsvm("1 1:1\n1 2:1\n")), DataError);
}

TEST(Preprocess, CompanionFileWidensDimension) {
  const auto train = parse_libsvm("1 1:1\n-1 2:1\n");
  const auto test = parse_libsvm("1 5:1\n");
  const auto pair = load_pair("toy", train, &test);
  EXPECT_EQ(pair.raw_features, 5u);
  EXPECT_EQ(pair.train.d, 6u);
  ASSERT_TRUE(pair.test);
  EXPECT_EQ(pair.test->d, 6u);
  EXPECT_EQ(pair.test->row(0).indices[0], 4u);
}

TEST(Preprocess, InvariantsOnGeneratedData) {
  const auto data = make_sparse_binary_dataset({500, 40, 3, 0.1}, 7);
  EXPECT_EQ(data.row_offsets().front(), 0u);
  EXPECT_EQ(data.row_offsets().back(), data.col_indices().size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = data.row(i);
    double sq = 0.0;
    for (std::size_t k = 0; k + 1 < r.nnz(); ++k) {
      EXPECT_LT(r.indices[k], r.indices[k + 1]);
      sq += r.values[k] * r.values[k];
    }
    EXPECT_EQ(r.indices[r.nnz() - 1], data.d - 1);
    EXPECT_EQ(r.values[r.nnz() - 1], 1.0);
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-12);
    EXPECT_TRUE(data.labels[i] == 1.0 || data.labels[i] == -1.0);
  }
}

namespace {

SparseDataset toy(std::size_t n) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) text += (i % 2 ? "1 1:" : "-1 2:") + std::to_string(i + 1) + "\n";
  return preprocess(parse_libsvm(text));
}

}  // namespace

TEST(Split, Sizes) {
  const auto s = split(toy(4), 0.75, 123);
  EXPECT_EQ(s.train.n(), 3u);
  EXPECT_EQ(s.test.n(), 1u);
  EXPECT_EQ(split_train_count(8124, 0.75), 6093u);
  EXPECT_EQ(8124u - split_train_count(8124, 0.75), 2031u);
  EXPECT_EQ(split_train_count(72309, 0.75), 54231u);
  EXPECT_EQ(split_train_count(19996, 0.75), 14997u);
  EXPECT_EQ(split_train_count(581012, 0.75), 435759u);
}

TEST(Split, DeterministicPartition) {
  const auto data = toy(101);
  const auto a = split(data, 0.75, 20210503);
  const auto b = split(data, 0.75, 20210503);
  EXPECT_EQ(a.train_rows, b.train_rows);
  EXPECT_EQ(a.test_rows, b.test_rows);
  std::set<std::size_t> seen(a.train_rows.begin(), a.train_rows.end());
  for (const auto r : a.test_rows) EXPECT_TRUE(seen.insert(r).second);
  EXPECT_EQ(seen.size(), data.n());
  EXPECT_EQ(*seen.rbegin(), data.n() - 1);
  const auto c = split(data, 0.75, 1);
  EXPECT_NE(a.train_rows, c.train_rows);
  EXPECT_EQ(a.train.n() + a.test.n(), data.n());
}

TEST(Split, Errors) {
  EXPECT_THROW(split(toy(4), 0.0, 1), DataError);
  EXPECT_THROW(split(toy(4), 1.0, 1), DataError);
  EXPECT_THROW(split(toy(4), -0.5, 1), DataError);
  SparseDataset one = toy(2).subset(std::vector<std::size_t>{0});
  EXPECT_THROW(split(one, 0.5, 1), DataError);
}

TEST(RoundTrip, RawAndPreprocessed) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = make_sparse_binary_dataset({30, 25, seed, 0.2}, 1 + seed % 7);
    std::ostringstream text;
    write_libsvm(text, data);
    const auto back = parse_libsvm(text.str());
    ASSERT_EQ(back.n(), data.n());
    EXPECT_EQ(back.labels, data.labels);
    EXPECT_EQ(back.rows.row_offsets, data.row_offsets());
    EXPECT_EQ(back.rows.col_indices, data.col_indices());
    EXPECT_EQ(back.rows.values, data.values());

    std::ostringstream text2;
    write_libsvm(text2, back);
    EXPECT_EQ(text2.str(), text.str());
  }
}

TEST(Registry, PublishedSizes) {
  const auto* a1a = find_dataset("a1a");
  ASSERT_NE(a1a, nullptr);
  EXPECT_EQ(a1a->raw_features, 123u);
  EXPECT_EQ(a1a->train_rows, 1605u);
  EXPECT_TRUE(a1a->official_split());
  const auto* mush = find_dataset("mushrooms");
  ASSERT_NE(mush, nullptr);
  EXPECT_FALSE(mush->official_split());
  EXPECT_EQ(split_train_count(mush->train_rows + mush->test_rows, 0.75), mush->train_rows);
  for (const auto& d : dataset_registry)
    if (!d.official_split()) {
      EXPECT_EQ(split_train_count(d.train_rows + d.test_rows, 0.75), d.train_rows) << d.name;
    }
  EXPECT_EQ(find_dataset("nonexistent"), nullptr);
  EXPECT_EQ(local_name("ijcnn1.t.bz2"), "ijcnn1.t");
  EXPECT_EQ(local_name("a1a"), "a1a");
}
