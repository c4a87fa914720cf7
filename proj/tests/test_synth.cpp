#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "fagcn/synth.hpp"
#include "fagcn/graph.hpp"

using namespace fagcn;

TEST_CASE("default dataset shape") {
  SynthDataset ds = generate_synthetic({});
  CHECK(ds.data.graph.num_nodes == 200);
  CHECK(ds.data.features.rows == 200);
  CHECK(ds.data.features.cols == 20);
  CHECK(ds.data.labels.size() == 200);
  for (int i = 0; i < 200; ++i) CHECK(ds.data.labels[i] == (i < 100 ? 0 : 1));
}

TEST_CASE("edge count is near its expectation across seeds") {
  // 19900 candidate pairs at p = q = 0.05: mean 995, sd ~30.7
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    const int e = generate_synthetic(cfg).data.graph.num_edges();
    CHECK(std::abs(e - 995) < 100);
  }
}

TEST_CASE("extreme block probabilities") {
  SUBCASE("p=1 q=0 gives two disjoint cliques") {
    SynthConfig cfg;
    cfg.num_nodes = 40;
    cfg.p_intra = 1.0;
    cfg.q_inter = 0.0;
    SynthDataset ds = generate_synthetic(cfg);
    CHECK(ds.data.graph.num_edges() == 2 * (20 * 19 / 2));
    for (int d : ds.data.graph.degrees) CHECK(d == 19);
    CHECK(label_assortativity(ds.data.graph, ds.data.labels) == doctest::Approx(1.0));
  }
  SUBCASE("p=q=0 gives an edgeless graph") {
    SynthConfig cfg;
    cfg.p_intra = 0.0;
    cfg.q_inter = 0.0;
    CHECK(generate_synthetic(cfg).data.graph.num_edges() == 0);
  }
}

TEST_CASE("assortativity tracks the intra/inter balance") {
  SynthConfig cfg;
  cfg.q_inter = 0.01;
  CHECK(label_assortativity(generate_synthetic(cfg).data.graph,
                            generate_synthetic(cfg).data.labels) > 0.5);
  cfg.q_inter = 0.10;
  CHECK(label_assortativity(generate_synthetic(cfg).data.graph,
                            generate_synthetic(cfg).data.labels) < -0.1);
}

TEST_CASE("feature block means match the class signs") {
  SynthDataset ds = generate_synthetic({});
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 20; ++j) m0 += ds.data.features(i, j);
  for (int i = 100; i < 200; ++i)
    for (int j = 0; j < 20; ++j) m1 += ds.data.features(i, j);
  m0 /= 2000.0;
  m1 /= 2000.0;
  // sd of each block mean is 1/sqrt(2000) ~ 0.0224
  CHECK(std::abs(m0 - 0.5) < 0.07);
  CHECK(std::abs(m1 + 0.5) < 0.07);
}

TEST_CASE("generation is reproducible and seed-sensitive") {
  SynthConfig cfg;
  SynthDataset a = generate_synthetic(cfg);
  SynthDataset b = generate_synthetic(cfg);
  CHECK(a.data.features.data == b.data.features.data);
  CHECK(a.data.graph.col_indices == b.data.graph.col_indices);

  cfg.seed = 2;
  SynthDataset c = generate_synthetic(cfg);
  CHECK(a.data.graph.col_indices != c.data.graph.col_indices);
  CHECK(a.data.features.data != c.data.features.data);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  SUBCASE("odd node count") {
    cfg.num_nodes = 201;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  }
  SUBCASE("only two blocks supported") {
    cfg.num_classes = 3;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  }
  SUBCASE("probabilities in [0,1]") {
    cfg.p_intra = 1.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  }
  SUBCASE("positive sigma") {
    cfg.sigma = 0.0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  }
}

TEST_CASE("random_split stratifies half/half") {
  SynthDataset ds = generate_synthetic({});
  Split sp = random_split(ds.data.labels, 0.5, 7);
  CHECK(!sp.has_val());
  int train0 = 0, train1 = 0, test_count = 0, overlap = 0;
  for (int i = 0; i < 200; ++i) {
    if (sp.train[i] && ds.data.labels[i] == 0) ++train0;
    if (sp.train[i] && ds.data.labels[i] == 1) ++train1;
    if (sp.test[i]) ++test_count;
    if (sp.train[i] && sp.test[i]) ++overlap;
  }
  CHECK(train0 == 50);
  CHECK(train1 == 50);
  CHECK(test_count == 100);
  CHECK(overlap == 0);
}

TEST_CASE("random_split top-up honors the global fraction") {
  LabelVector labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  Split sp = random_split(labels, 0.9, 3);
  int train = 0;
  for (auto m : sp.train) train += m;
  CHECK(train == 9);
}

TEST_CASE("random_split is reproducible and seed-sensitive") {
  SynthDataset ds = generate_synthetic({});
  Split a = random_split(ds.data.labels, 0.5, 7);
  Split b = random_split(ds.data.labels, 0.5, 7);
  Split c = random_split(ds.data.labels, 0.5, 8);
  CHECK(a.train == b.train);
  CHECK(a.train != c.train);
}

TEST_CASE("random_split validates the fraction") {
  CHECK_THROWS_AS(random_split({0, 1}, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_split({0, 1}, 1.1, 1), std::invalid_argument);
}
