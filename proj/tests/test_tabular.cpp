#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "perfband/common/rng.hpp"
#include "perfband/common/stats.hpp"
#include "perfband/tabular/bootstrap.hpp"
#include "perfband/tabular/dataset.hpp"
#include "perfband/tabular/encoding.hpp"
#include "perfband/tabular/histogram.hpp"
#include "perfband/tabular/split.hpp"

using namespace perfband;
using namespace perfband::tabular;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

DatasetSchema two_col_schema() {
  DatasetSchema schema;
  schema.id = "toy";
  schema.label = "y";
  schema.column_kinds = {{"x1", ColumnKind::numeric}, {"x2", ColumnKind::numeric}};
  return schema;
}

}  // namespace

TEST_CASE("load_dataset: small numeric CSV") {
  auto path = write_temp("pb_toy.csv",
                         "x1,x2,y\n"
                         "1.0,2.0,yes\n"
                         "3.5,-1.0,no\n"
                         "0.0,0.25,yes\n"
                         "2.0,2.0,no\n");
  Dataset data = load_dataset(path.string(), two_col_schema());
  CHECK(data.n() == 4);
  CHECK(data.n_classes() == 2);
  CHECK(data.values.at(1, 0) == 3.5);
  CHECK(data.labels[0] == data.labels[2]);
  CHECK(data.labels[0] != data.labels[1]);
}

TEST_CASE("load_dataset: categorical dictionary encoding in first-seen order") {
  auto path = write_temp("pb_cat.csv",
                         "color,x,y\n"
                         "a,1,p\n"
                         "b,2,q\n"
                         "a,3,p\n");
  DatasetSchema schema;
  schema.id = "cat";
  schema.label = "y";
  schema.column_kinds = {{"color", ColumnKind::categorical}, {"x", ColumnKind::numeric}};
  Dataset data = load_dataset(path.string(), schema);
  const ColumnMeta& col = data.columns[0];
  CHECK(col.kind == ColumnKind::categorical);
  CHECK(col.categories == std::vector<std::string>{"a", "b"});
  CHECK(data.values.at(0, 0) == 0.0);
  CHECK(data.values.at(1, 0) == 1.0);
  // Values outside the dictionary map to the reserved trailing code.
  CHECK(category_code(col, "c") == 2);
}

TEST_CASE("load_dataset: malformed row reports its line number") {
  auto path = write_temp("pb_bad.csv",
                         "x1,x2,y\n"
                         "1,2,yes\n"
                         "3,4\n");
  try {
    load_dataset(path.string(), two_col_schema());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load_dataset: unknown label value is a schema error") {
  auto path = write_temp("pb_lab.csv",
                         "x1,x2,y\n"
                         "1,2,yes\n"
                         "3,4,maybe\n");
  DatasetSchema schema = two_col_schema();
  schema.label_values = {"yes", "no"};
  CHECK_THROWS_AS(load_dataset(path.string(), schema), SchemaError);
}

TEST_CASE("load_dataset: empty file rejected") {
  auto path = write_temp("pb_empty.csv", "");
  CHECK_THROWS_AS(load_dataset(path.string(), two_col_schema()), ParseError);
}

TEST_CASE("dataset round-trip: load, write, load is identical") {
  Rng rng(31);
  std::string csv = "x1,x2,y\n";
  for (int i = 0; i < 10000; ++i) {
    csv += std::to_string(rng.uniform(-5, 5)) + "," + std::to_string(rng.uniform(0, 1)) + "," +
           (rng.bernoulli(0.5) ? "yes" : "no") + "\n";
  }
  auto path = write_temp("pb_rt.csv", csv);
  Dataset first = load_dataset(path.string(), two_col_schema());
  auto copy = std::filesystem::temp_directory_path() / "pb_rt2.csv";
  write_dataset_csv(first, copy.string());
  Dataset second = load_dataset(copy.string(), two_col_schema());
  CHECK(first.values == second.values);
  CHECK(first.labels == second.labels);
  CHECK(first.label_names == second.label_names);
}

TEST_CASE("random_split: exact multiples give exact sizes") {
  SplitTriple s = random_split(100, 0.4, 0.2, 0.4, 7);
  CHECK(s.train.size() == 40);
  CHECK(s.test.size() == 20);
  CHECK(s.prod.size() == 40);
}

TEST_CASE("random_split: zero fraction gives an empty part") {
  SplitTriple s = random_split(50, 0.6, 0.4, 0.0, 3);
  CHECK(s.prod.empty());
  CHECK(s.train.size() + s.test.size() == 50);
}

TEST_CASE("random_split: parts are disjoint and cover all rows") {
  SplitTriple s = random_split(101, 0.5, 0.25, 0.25, 11);
  std::set<int> seen;
  for (auto part : {&s.train, &s.test, &s.prod})
    for (int r : *part) CHECK(seen.insert(r).second);
  CHECK(seen.size() == 101);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 100);
}

TEST_CASE("random_split: deterministic per seed, varies across seeds") {
  int distinct = 0;
  SplitTriple base = random_split(60, 0.5, 0.3, 0.2, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SplitTriple a = random_split(60, 0.5, 0.3, 0.2, seed);
    SplitTriple b = random_split(60, 0.5, 0.3, 0.2, seed);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.prod == b.prod);
    if (a.train != base.train) ++distinct;
  }
  CHECK(distinct > 95);
}

TEST_CASE("random_split: fractions must sum to 1") {
  CHECK_THROWS(random_split(10, 0.5, 0.2, 0.2, 1));
}

TEST_CASE("build_histogram: direct binning and half-open convention") {
  BinSpec spec = BinSpec::uniform(0.0, 1.0, 10);
  Histogram h = build_histogram({0.05, 0.15}, spec);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[1] == 1);
  for (std::size_t b = 2; b < h.counts.size(); ++b) CHECK(h.counts[b] == 0);

  // A value exactly on an interior edge belongs to the right bin.
  Histogram edge = build_histogram({0.1}, spec);
  CHECK(edge.counts[1] == 1);
  // The final bin is right-closed.
  Histogram last = build_histogram({1.0}, spec);
  CHECK(last.counts[9] == 1);
}

TEST_CASE("build_histogram: all-equal values concentrate mass 1") {
  Histogram h = build_histogram({0.42, 0.42, 0.42}, BinSpec::uniform(0.0, 1.0, 10));
  CHECK(h.counts[4] == 3);
  CHECK(h.mass[4] == doctest::Approx(1.0));
}

TEST_CASE("build_histogram: clip policy keeps out-of-range mass, drop removes it") {
  BinSpec clip = BinSpec::uniform(0.0, 1.0, 4);
  Histogram h = build_histogram({-0.5, 0.3, 2.0}, clip);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[3] == 1);
  CHECK(h.included == 3);

  BinSpec drop = clip;
  drop.policy = OutOfRange::drop;
  Histogram d = build_histogram({-0.5, 0.3, 2.0}, drop);
  CHECK(d.included == 1);
  double total = 0.0;
  for (double m : d.mass) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("build_histogram: mass sums to 1 whenever any value lands") {
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> values;
    for (int i = 0; i < 50; ++i) values.push_back(rng.uniform(-0.2, 1.2));
    Histogram h = build_histogram(values, BinSpec::uniform(0.0, 1.0, 7));
    double total = 0.0;
    std::int64_t count = 0;
    for (double m : h.mass) total += m;
    for (auto c : h.counts) count += c;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(count == h.included);
  }
}

TEST_CASE("build_histogram: empty binning rejected") {
  std::vector<double> edges{0.5};
  CHECK_THROWS(BinSpec::from_edges(edges));
}

TEST_CASE("bootstrap width: constant values give width 0") {
  CHECK(bootstrap_interval_width({2.0, 2.0, 2.0, 2.0}, 200, 0.95, 1) == 0.0);
}

TEST_CASE("bootstrap width: matches the CLT half-width on a normal sample") {
  Rng rng(123);
  std::vector<double> sample;
  for (int i = 0; i < 400; ++i) sample.push_back(rng.normal());
  double width = bootstrap_interval_width(sample, 1000, 0.95, 42);
  double clt = 1.959963984540054 * stdev(sample, 1) / std::sqrt(400.0);
  CHECK(width == doctest::Approx(clt).epsilon(0.25));
  CHECK(width > 0.0);
}

TEST_CASE("bootstrap width: shrinks when the sample grows 100-fold") {
  Rng rng(5);
  int shrank = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<double> small, large;
    for (int i = 0; i < 30; ++i) small.push_back(rng.uniform());
    for (int i = 0; i < 3000; ++i) large.push_back(rng.uniform());
    if (bootstrap_interval_width(large, 300, 0.95, seed) <
        bootstrap_interval_width(small, 300, 0.95, seed))
      ++shrank;
  }
  CHECK(shrank > 45);
}

TEST_CASE("bootstrap width: deterministic given seed") {
  std::vector<double> sample{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  CHECK(bootstrap_interval_width(sample, 500, 0.9, 9) ==
        bootstrap_interval_width(sample, 500, 0.9, 9));
}

TEST_CASE("encoder: tree mode imputes medians and keeps codes") {
  auto path = write_temp("pb_enc.csv",
                         "num,cat,y\n"
                         "1.0,a,p\n"
                         ",b,q\n"
                         "3.0,a,p\n"
                         "5.0,c,q\n");
  DatasetSchema schema;
  schema.id = "enc";
  schema.label = "y";
  schema.column_kinds = {{"num", ColumnKind::numeric}, {"cat", ColumnKind::categorical}};
  Dataset data = load_dataset(path.string(), schema);

  Encoder enc = Encoder::fit(data, {0, 1, 2, 3}, EncodeMode::tree);
  Matrix X = enc.transform(data, {0, 1, 2, 3});
  CHECK(X.cols == 2);
  CHECK(X.at(1, 0) == doctest::Approx(3.0));  // median of {1, 3, 5}
  CHECK(X.at(3, 1) == 2.0);                   // third category code
}

TEST_CASE("encoder: linear mode standardizes and one-hot expands") {
  auto path = write_temp("pb_enc2.csv",
                         "num,cat,y\n"
                         "1.0,a,p\n"
                         "2.0,b,q\n"
                         "3.0,a,p\n");
  DatasetSchema schema;
  schema.id = "enc2";
  schema.label = "y";
  schema.column_kinds = {{"num", ColumnKind::numeric}, {"cat", ColumnKind::categorical}};
  Dataset data = load_dataset(path.string(), schema);

  Encoder enc = Encoder::fit(data, {0, 1, 2}, EncodeMode::linear);
  Matrix X = enc.transform(data, {0, 1, 2});
  CHECK(X.cols == 3);  // standardized numeric + 2 one-hot slots
  std::vector<double> first_col{X.at(0, 0), X.at(1, 0), X.at(2, 0)};
  CHECK(mean(first_col) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(X.at(0, 1) == 1.0);
  CHECK(X.at(1, 2) == 1.0);

  Encoder dist = Encoder::fit(data, {0, 1, 2}, EncodeMode::distance);
  Matrix D = dist.transform(data, {0, 1, 2});
  // Two rows differing only in category sit at Euclidean distance 1.
  double gap = 0.0;
  for (std::size_t c = 1; c < D.cols; ++c) {
    double diff = D.at(0, c) - D.at(1, c);
    gap += diff * diff;
  }
  CHECK(std::sqrt(gap) == doctest::Approx(1.0).epsilon(1e-12));
}
