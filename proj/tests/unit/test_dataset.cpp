#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ndswarm/dataset.hpp"
#include "oracles.hpp"

using namespace ndswarm;

namespace {

const std::string kWine = std::string(NDSWARM_SOURCE_DIR) + "/data/winequality-red.csv";

CsvOptions with_label(std::string column) {
  CsvOptions o;
  o.label_column = std::move(column);
  return o;
}

}  // namespace

TEST(Csv, ColumnsBecomeRows) {
  const auto ds = parse_csv("a,b,label\n1,2,p\n3,4,q\n", with_label("label"));
  ASSERT_EQ(ds.dims(), 2);
  ASSERT_EQ(ds.points(), 2);
  EXPECT_EQ(ds.names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.values()(0, 1), 3.0);
  EXPECT_EQ(ds.values()(1, 0), 2.0);
  ASSERT_TRUE(ds.labels());
  EXPECT_EQ(*ds.labels(), (std::vector<std::string>{"p", "q"}));
}

TEST(Csv, WineShape) {
  const auto ds = load_csv(kWine);
  EXPECT_EQ(ds.dims(), 12);
  EXPECT_EQ(ds.points(), 1599);
  EXPECT_EQ(ds.names().front(), "fixed acidity");
  EXPECT_EQ(ds.names().back(), "quality");
}

TEST(Csv, BlankCellDropsPoint) {
  const auto ds = parse_csv("a,b\n1,2\n3,\n5,6\n");
  EXPECT_EQ(ds.points(), 2);
  EXPECT_EQ(ds.values()(0, 1), 5.0);
}

TEST(Csv, StrictRejectsMissingAndGarbage) {
  CsvOptions strict;
  strict.missing_policy = MissingPolicy::Strict;
  EXPECT_THROW(parse_csv("a,b\n1,2\n3,\n", strict), DatasetError);
  EXPECT_THROW(parse_csv("a,b\n1,2\n3,x\n", strict), DatasetError);
  EXPECT_NO_THROW(parse_csv("a,b\n1,2\n3,4\n", strict));
}

TEST(Csv, MissingTokens) {
  const auto ds = parse_csv("a\n1\nNA\nnan\nN/A\nnull\n2\n");
  EXPECT_EQ(ds.points(), 2);
}

TEST(Csv, StructuralErrors) {
  EXPECT_THROW(parse_csv(""), DatasetError);
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), DatasetError);
  EXPECT_THROW(parse_csv("a,a\n1,2\n"), DatasetError);
  EXPECT_THROW(parse_csv("a,\n1,2\n"), DatasetError);
  EXPECT_THROW(parse_csv("a,b\n1,2\n", with_label("name")), DatasetError);
  EXPECT_THROW(parse_csv("a\n"), DatasetError);
  EXPECT_THROW(parse_csv("a,\"b\n1,2\n"), DatasetError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), DatasetError);
}

TEST(Csv, TextColumnMustBeTheLabel) {
  try {
    parse_csv("name,v\nx,1\ny,2\n");
    FAIL() << "expected an error";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("label column"), std::string::npos);
  }
  EXPECT_EQ(parse_csv("name,v\nx,1\ny,2\n", with_label("name")).dims(), 1);
}

TEST(Csv, QuotingBomAndDelimiters) {
  const auto ds = parse_csv("\xEF\xBB\xBF\"first, col\",\"b\"\"q\",label\n1,2,\"x,\ny\"\n\n3,4,z\r\n",
                            with_label("label"));
  EXPECT_EQ(ds.names(), (std::vector<std::string>{"first, col", "b\"q"}));
  EXPECT_EQ((*ds.labels())[0], "x,\ny");
  EXPECT_EQ(ds.points(), 2);

  CsvOptions semi;
  semi.delimiter = ';';
  const auto ds2 = parse_csv("a;b\n1.5;-2e3\n+4;.5\n", semi);
  EXPECT_EQ(ds2.values()(1, 0), -2000.0);
  EXPECT_EQ(ds2.values()(0, 1), 4.0);
  EXPECT_EQ(ds2.values()(1, 1), 0.5);
}

TEST(Csv, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::uniform_int_distribution<int> e(-300, 300);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x(5, 40);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::ldexp(u(rng), e(rng) / 4);
    x(0, 0) = -0.0;
    x(1, 0) = 5e-324;
    x(2, 0) = 1.7976931348623157e308;
    std::vector<std::string> labels;
    for (int j = 0; j < 40; ++j) labels.push_back(j % 3 ? "p" + std::to_string(j) : "q, \"" + std::to_string(j) + "\"");
    const Dataset ds({"a", "b c", "d,e", "f\"g", "h"}, x, labels, "mem");
    std::ostringstream out;
    write_csv(ds, out);
    const auto back = parse_csv(out.str(), with_label("label"));
    ASSERT_EQ(back, ds);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      ASSERT_EQ(std::signbit(back.values()(i)), std::signbit(x(i)));
    }
  }
}

TEST(DatasetInvariants, ConstructorRejectsBadInput) {
  Eigen::MatrixXd x(2, 2);
  x << 1, 2, 3, 4;
  EXPECT_THROW(Dataset({"a"}, x), DatasetError);
  EXPECT_THROW(Dataset({"a", "a"}, x), DatasetError);
  EXPECT_THROW(Dataset({"a", ""}, x), DatasetError);
  EXPECT_THROW(Dataset({"a", "b"}, x, std::vector<std::string>{"one"}), DatasetError);
  Eigen::MatrixXd bad = x;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Dataset({"a", "b"}, bad), DatasetError);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Dataset({"a", "b"}, bad), DatasetError);
  EXPECT_THROW(Dataset({}, Eigen::MatrixXd(0, 3)), DatasetError);
  EXPECT_THROW(Dataset({"a"}, Eigen::MatrixXd(1, 0)), DatasetError);
  const Dataset ok({"a", "b"}, x);
  EXPECT_EQ(ok.find("b"), 1);
  EXPECT_FALSE(ok.find("c"));
}

TEST(Summary, SmallRows) {
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3, 5, 5, 5;
  const auto s = summarize(Dataset({"r", "c"}, x));
  EXPECT_EQ(s[0].min, 1.0);
  EXPECT_EQ(s[0].max, 3.0);
  EXPECT_EQ(s[0].mean, 2.0);
  EXPECT_EQ(s[0].distinct, 3u);
  EXPECT_EQ(s[1].stddev, 0.0);
  EXPECT_EQ(s[1].distinct, 1u);
}

TEST(Summary, MatchesTwoPassOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = oracle::random_data(3, 100, rng) * (trial + 1.0) + Eigen::MatrixXd::Constant(3, 100, trial);
    const auto s = summarize(oracle::dataset_from(x));
    for (Eigen::Index r = 0; r < 3; ++r) {
      const auto m = oracle::two_pass(x.row(r));
      EXPECT_NEAR(s[static_cast<std::size_t>(r)].mean, m.mean, 1e-12 * std::max(1.0, std::abs(m.mean)));
      EXPECT_NEAR(s[static_cast<std::size_t>(r)].stddev, m.stddev, 1e-12 * std::max(1.0, m.stddev));
      EXPECT_LE(s[static_cast<std::size_t>(r)].min, s[static_cast<std::size_t>(r)].mean);
      EXPECT_LE(s[static_cast<std::size_t>(r)].mean, s[static_cast<std::size_t>(r)].max);
    }
  }
}

TEST(Summary, PermutationInvariant) {
  std::mt19937_64 rng(5);
  const auto x = oracle::random_data(4, 257, rng);
  const auto base = summarize(oracle::dataset_from(x));
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Eigen::Index> perm(257);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd y(4, 257);
    for (Eigen::Index j = 0; j < 257; ++j) y.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
    const auto s = summarize(oracle::dataset_from(y));
    for (std::size_t r = 0; r < 4; ++r) {
      EXPECT_EQ(s[r].min, base[r].min);
      EXPECT_EQ(s[r].max, base[r].max);
      EXPECT_EQ(s[r].mean, base[r].mean);
      EXPECT_EQ(s[r].stddev, base[r].stddev);
      EXPECT_EQ(s[r].distinct, base[r].distinct);
    }
  }
}

TEST(Synthetic, PoliticiansShape) {
  const auto ds = generate_synthetic({Archetype::Politicians, 12, 1});
  EXPECT_EQ(ds.dims(), 10);  // nine features plus group_numeric
  EXPECT_EQ(ds.points(), 12);
  ASSERT_TRUE(ds.labels());
  std::set<std::string> names(ds.labels()->begin(), ds.labels()->end());
  EXPECT_EQ(names.size(), 12u);
  EXPECT_TRUE(ds.find("group_numeric"));
}

TEST(Synthetic, DrinksHaveThreeGroups) {
  const auto ds = generate_synthetic({Archetype::Drinks, 100, 3});
  EXPECT_EQ(ds.points(), 100);
  const auto g = *ds.find("group_numeric");
  std::set<double> groups;
  for (Eigen::Index j = 0; j < ds.points(); ++j) groups.insert(ds.values()(g, j));
  EXPECT_EQ(groups.size(), 3u);
  EXPECT_EQ(archetype_groups(Archetype::Drinks), 3u);
}

TEST(Synthetic, SeedDeterminism) {
  const auto a = generate_synthetic({Archetype::Drinks, 50, 42});
  const auto b = generate_synthetic({Archetype::Drinks, 50, 42});
  const auto c = generate_synthetic({Archetype::Drinks, 50, 43});
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
}

TEST(Synthetic, Errors) {
  EXPECT_THROW(parse_archetype("cars"), DatasetError);
  EXPECT_THROW(generate_synthetic({Archetype::Politicians, 3, 1}), DatasetError);
  EXPECT_EQ(parse_archetype("drinks"), Archetype::Drinks);
}
