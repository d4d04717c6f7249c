#include <doctest.h>

#include <cmath>
#include <random>

#include "offlang/autodiff.hpp"
#include "offlang/embed.hpp"
#include "offlang/error.hpp"
#include "offlang/models.hpp"
#include "support/synthetic.hpp"

using namespace offlang;
using models::Batch;
using models::ModelState;

namespace {

embed::EmbeddingTable table_for_vocab_size(int vocab_size, std::uint64_t seed) {
  std::vector<std::string> tokens;
  for (int i = 0; i < vocab_size - 2; ++i) {
    tokens.push_back("t" + testsupport::letter_suffix(i));
  }
  return embed::random_embeddings(embed::Vocab(tokens), seed);
}

long long count_named(const ModelState& state, const std::string& prefix) {
  long long total = 0;
  for (const auto& p : state.params) {
    if (p.name.rfind(prefix, 0) == 0) {
      total += static_cast<long long>(p.tensor.size());
    }
  }
  return total;
}

}  // namespace

TEST_CASE("bilstm parameter shapes match the closed-form counts") {
  auto table = table_for_vocab_size(1000, 3);
  models::BiLstmConfig cfg;
  auto state = models::init_bilstm(cfg, table, 17);

  // per layer and direction: 4H*(in+H) + 4H with a single bias per gate
  CHECK(count_named(state, "l1.") == 19360);
  CHECK(count_named(state, "l2.") == 9760);
  CHECK(count_named(state, "classifier.") == 82);
  const long long non_embedding =
      count_named(state, "l1.") + count_named(state, "l2.") +
      count_named(state, "classifier.");
  CHECK(non_embedding == 29202);

  // 1000 x 100 stored values; the frozen PAD row drops out of the
  // trainable count.
  CHECK(models::total_param_count(state) == 129202);
  CHECK(models::param_count(state) == 129102);
}

TEST_CASE("cnn parameter shapes match the closed-form counts") {
  auto table = table_for_vocab_size(1000, 3);
  models::CnnConfig cfg;
  auto state = models::init_cnn(cfg, table, 17);
  const long long conv = count_named(state, "conv2.") +
                         count_named(state, "conv3.") +
                         count_named(state, "conv4.");
  CHECK(conv == 90300);  // (2*100+1 + 3*100+1 + 4*100+1) * 100
  CHECK(count_named(state, "classifier.") == 602);
  CHECK(models::total_param_count(state) == 190902);
  CHECK(models::param_count(state) == 190802);
}

TEST_CASE("the same seed builds identical models") {
  auto table = table_for_vocab_size(50, 3);
  auto a = models::init_bilstm({}, table, 77);
  auto b = models::init_bilstm({}, table, 77);
  REQUIRE(a.params.size() == b.params.size());
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    REQUIRE(a.params[i].tensor.data == b.params[i].tensor.data);
  }
  auto c = models::init_bilstm({}, table, 78);
  CHECK(a.params[1].tensor.data != c.params[1].tensor.data);
}

TEST_CASE("forget-gate biases start at one") {
  auto table = table_for_vocab_size(20, 3);
  auto state = models::init_bilstm({}, table, 5);
  const auto& b = state.find("l1.fwd.b");
  const int h = state.bilstm.hidden;
  for (int j = 0; j < 4 * h; ++j) {
    CHECK(b.data[static_cast<std::size_t>(j)] == (j >= h && j < 2 * h ? 1.0 : 0.0));
  }
}

TEST_CASE("zeroed classifier weights give uniform probabilities") {
  auto table = table_for_vocab_size(30, 3);
  for (auto kind : {models::ModelKind::kBiLstm, models::ModelKind::kCnn}) {
    ModelState state = kind == models::ModelKind::kBiLstm
                           ? models::init_bilstm({}, table, 9)
                           : models::init_cnn({}, table, 9);
    auto& w = state.find("classifier.w");
    auto& b = state.find("classifier.b");
    std::fill(w.data.begin(), w.data.end(), 0.0);
    std::fill(b.data.begin(), b.data.end(), 0.0);
    auto probs = models::predict(state, {2, 5, 7});
    REQUIRE(probs.size() == 2);
    CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("probabilities are a distribution for many random inputs") {
  auto table = table_for_vocab_size(40, 3);
  auto bilstm = models::init_bilstm({}, table, 21);
  auto cnn = models::init_cnn({}, table, 21);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len_dist(1, 30);
  std::uniform_int_distribution<int> id_dist(0, 39);
  for (int i = 0; i < 1000; ++i) {
    std::vector<int> ids(static_cast<std::size_t>(len_dist(rng)));
    for (int& id : ids) id = id_dist(rng);
    ModelState& state = i % 2 ? bilstm : cnn;
    auto probs = models::predict(state, ids);
    double sum = 0.0;
    for (double p : probs) {
      REQUIRE(p >= 0.0);
      sum += p;
    }
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("prediction rejects ids outside the vocabulary") {
  auto table = table_for_vocab_size(10, 3);
  auto state = models::init_bilstm({}, table, 1);
  CHECK_THROWS_AS(models::predict(state, {3, 10}), EncodingError);
}

TEST_CASE("bilstm outputs change when the input is reversed") {
  auto table = table_for_vocab_size(30, 3);
  auto state = models::init_bilstm({}, table, 33);
  const std::vector<int> forward = {2, 9, 4, 17, 11};
  std::vector<int> reversed(forward.rbegin(), forward.rend());
  auto p1 = models::predict(state, forward);
  auto p2 = models::predict(state, reversed);
  CHECK(std::abs(p1[0] - p2[0]) > 1e-9);
}

TEST_CASE("pad-only suffixes never change eval output") {
  auto table = table_for_vocab_size(30, 3);
  for (auto kind : {models::ModelKind::kBiLstm, models::ModelKind::kCnn}) {
    ModelState state = kind == models::ModelKind::kBiLstm
                           ? models::init_bilstm({}, table, 12)
                           : models::init_cnn({}, table, 12);
    const std::vector<int> plain = {5, 8, 2, 19};
    std::vector<int> padded = plain;
    for (int i = 0; i < 7; ++i) padded.push_back(embed::kPadIndex);
    auto p1 = models::predict(state, plain);
    auto p2 = models::predict(state, padded);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
      REQUIRE(p1[i] == doctest::Approx(p2[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("cnn branch outputs are translation invariant inside padding") {
  auto table = table_for_vocab_size(30, 3);
  auto state = models::init_cnn({}, table, 44);
  state.mode = models::Mode::kEval;

  // The same two-token pattern at two interior offsets of a fixed-length
  // pad-only sequence: every branch sees the same window multiset.
  auto branch_reps = [&](const std::vector<int>& ids) {
    Batch batch = models::make_batch({ids}, {}, 4);
    batch.lengths[0] = static_cast<int>(ids.size());  // count pads as context
    ad::Graph graph;
    ad::Node* out = models::logits(state, graph, batch);
    return out->data;
  };
  // Keep the pattern at least max_width-1 positions away from both ends
  // so no window overlapping it gets clipped.
  std::vector<int> shift1(14, embed::kPadIndex);
  shift1[4] = 7;
  shift1[5] = 9;
  std::vector<int> shift2(14, embed::kPadIndex);
  shift2[7] = 7;
  shift2[8] = 9;
  auto r1 = branch_reps(shift1);
  auto r2 = branch_reps(shift2);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    REQUIRE(r1[i] == doctest::Approx(r2[i]).epsilon(1e-12));
  }
}

TEST_CASE("short cnn inputs are padded to the widest filter") {
  auto table = table_for_vocab_size(30, 3);
  auto state = models::init_cnn({}, table, 3);
  auto probs = models::predict(state, {4});  // length 1 < width 4
  CHECK(probs.size() == 2);
  CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full-model losses pass gradient checks on small batches") {
  auto table = table_for_vocab_size(12, 3);
  models::BiLstmConfig bcfg;
  bcfg.hidden = 4;
  models::CnnConfig ccfg;
  ccfg.filters_per_width = 5;

  for (int which = 0; which < 2; ++which) {
    ModelState state = which == 0 ? models::init_bilstm(bcfg, table, 50)
                                  : models::init_cnn(ccfg, table, 50);
    state.mode = models::Mode::kEval;  // dropout identity keeps f smooth
    Batch batch = models::make_batch({{2, 3, 4, 5}, {6, 7, 8, 9}}, {0, 1}, 4);

    // Check d loss / d embeddings through the whole network.
    auto f = [&](ad::Graph& g, ad::Node* emb) {
      ad::Node* out = models::logits_from_embeddings(state, g, emb, batch.lengths);
      return g.softmax_cross_entropy(out, batch.labels);
    };
    ad::Graph probe;
    ad::Node* emb0 = models::embed_ids(state, probe, batch);
    ad::Tensor point = ad::Tensor::from(emb0->shape, emb0->data);
    CHECK(ad::grad_check(f, point, 1e-5) < 1e-3);
  }
}
