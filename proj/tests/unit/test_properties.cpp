// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mmcr/common/error.hpp"
#include "mmcr/dataset/synthetic.hpp"
#include "mmcr/evaluation/analysis.hpp"
#include "mmcr/inference/inference.hpp"
#include "mmcr/scoring/scoring.hpp"
#include "mmcr/training/checkpoint.hpp"
#include "mmcr/training/loss.hpp"
#include "oracles.hpp"

using namespace mmcr;
using testing::Gen;

TEST_SUITE("properties") {
  TEST_CASE("ranking loss agrees with the brute-force hinge and is shift invariant") {
    Gen g(101);
    for (int trial = 0; trial < 500; ++trial) {
      const auto n = g.size(2, 6);
      const auto s = g.vec(n);
      const int y = static_cast<int>(g.size(0, n - 1));
      const double margin = g.real(0.1, 2.0);
      const double l = ranking_loss(s, y, margin);
      CHECK(std::abs(l - static_cast<double>(oracle::hinge_loss(s, y, margin))) <= 1e-12);
      CHECK(l >= 0.0);
      auto shifted = s;
      const double c = g.real(-5, 5);
      for (auto& v : shifted) v += c;
      CHECK(ranking_loss(shifted, y, margin) == doctest::Approx(l).epsilon(1e-9));

      bool separated = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i) != y && s[static_cast<std::size_t>(y)] - s[i] < margin) separated = false;
      }
      CHECK((l == 0.0) == separated);
    }
  }

  TEST_CASE("softmax is a shift-invariant, order-preserving distribution") {
    Gen g(202);
    for (int trial = 0; trial < 300; ++trial) {
      const auto s = g.vec(g.size(1, 8), -30, 30);
      const auto p = softmax(s);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v > 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      const auto ref = oracle::softmax(s);
      for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(std::abs(p[i] - static_cast<double>(ref[i])) <= 1e-12);
        for (std::size_t j = 0; j < s.size(); ++j) {
          if (s[i] < s[j]) CHECK(p[i] <= p[j]);
        }
      }
      CHECK(argmax(p) == argmax(s));
    }
  }

  TEST_CASE("ensembles stay convex") {
    Gen g(303);
    for (int trial = 0; trial < 300; ++trial) {
      const auto n = g.size(2, 6);
      const auto a = g.distribution(n), b = g.distribution(n);
      const double lambda = g.real(0.0, 1.0);
      const auto e = ensemble(a, b, lambda);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += e.probs[i];
        CHECK(e.probs[i] >= std::min(a[i], b[i]) - 1e-15);
        CHECK(e.probs[i] <= std::max(a[i], b[i]) + 1e-15);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      CHECK(e.probs[static_cast<std::size_t>(e.predicted_index)] == *std::max_element(e.probs.begin(), e.probs.end()));
    }
  }

  TEST_CASE("attention weights, permutation invariance and the single patch") {
    Gen g(404);
    for (int trial = 0; trial < 200; ++trial) {
      const auto d = g.size(2, 8);
      const auto p = g.size(1, 12);
      const auto t = g.vec(d);
      const auto v = g.patches(1, p, d);
      const auto ctx = contextualize(t, v, Projection{});
      double sum = 0.0;
      for (double w : ctx.attention.weights) sum += w;
      CHECK(std::abs(sum - 1.0) <= 1e-12);

      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < p; ++i) rows.emplace_back(v.patch(i).begin(), v.patch(i).end());
      const auto ref = oracle::attention(t, rows);
      for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(ctx.c[k] - static_cast<double>(ref.c[k])) <= 1e-12);

      // Reversing the patch order permutes the weights and leaves c alone.
      VisualFeatures rev = v;
      for (std::size_t i = 0; i < p; ++i) {
        std::copy(rows[p - 1 - i].begin(), rows[p - 1 - i].end(), rev.patches.begin() + static_cast<long>(i * d));
      }
      const auto rctx = contextualize(t, rev, Projection{});
      for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(rctx.c[k] - ctx.c[k]) <= 1e-12);

      const auto one = contextualize(t, VisualFeatures{1, 1, d, rows[0]}, Projection{});
      CHECK(one.c == rows[0]);
    }
  }

  TEST_CASE("cosine and relevance ranges") {
    Gen g(505);
    for (int trial = 0; trial < 300; ++trial) {
      const auto n = g.size(1, 10);
      const auto a = g.vec(n), b = g.vec(n);
      const double c = cosine(a, b);
      CHECK(c >= -1.0 - 1e-15);
      CHECK(c <= 1.0 + 1e-15);
      CHECK(c == cosine(b, a));
      CHECK(std::abs(c - static_cast<double>(oracle::cosine(a, b))) <= 1e-12);
      auto scaled = a;
      for (auto& v : scaled) v *= 7.5;
      CHECK(cosine(scaled, b) == doctest::Approx(c).epsilon(1e-12));
      const double r = relevance(a, b);
      CHECK(r >= 0.0);
      CHECK(r <= 100.0);
    }
  }

  TEST_CASE("helpful and harmful counts partition the evaluated items") {
    Gen g(606);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<ScoredItem> items;
      const auto n = g.size(1, 30);
      for (std::size_t i = 0; i < n; ++i) {
        items.push_back({std::to_string(i), testing::two_way_scores(g.real(0.05, 0.95), g.real(0.05, 0.95)),
                         g.coin() ? 1 : 0});
      }
      const auto r = helpful_harmful(items, g.real(0.01, 1.0));
      CHECK(r.helpful + r.harmful + r.neutral == r.evaluated);
      CHECK(r.accuracy - r.text_only_accuracy ==
            doctest::Approx((static_cast<double>(r.helpful) - static_cast<double>(r.harmful)) / r.evaluated));
    }
  }

  TEST_CASE("synthetic QA items keep their invariants") {
    Gen g(707);
    const auto table = default_templates();
    std::vector<std::string> relations;
    for (const auto& [rel, text] : table.templates) relations.push_back(rel);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::string> pool;
      for (std::size_t i = 0, n = g.size(3, 15); i < n; ++i) pool.push_back(g.phrase(1, 3));
      const KnowledgeTriple t{"PersonX " + g.phrase(1, 4), relations[g.size(0, relations.size() - 1)],
                              g.phrase(1, 3), TripleSource::Base};
      try {
        const auto qa = triple_to_qa(t, pool, 2, g.size(0, 1000), table);
        REQUIRE(qa.choices.size() == 3);
        CHECK(std::set<std::string>(qa.choices.begin(), qa.choices.end()).size() == 3);
        CHECK(qa.choices[static_cast<std::size_t>(qa.answer_index)] == t.tail);
      } catch (const Error& e) {
        // Small random pools may not hold two admissible distractors.
        CHECK(e.code() == ErrorCode::PoolExhausted);
      }
    }
  }

  TEST_CASE("dedup is idempotent and order preserving") {
    Gen g(808);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<QAPair> pairs;
      for (std::size_t i = 0, n = g.size(0, 40); i < n; ++i) {
        pairs.push_back({std::to_string(i), g.word(), {"a", "b", "c"}, 0, QASource::SyntheticKb});
      }
      const auto once = dedup_questions(pairs);
      const auto twice = dedup_questions(once);
      REQUIRE(once.size() == twice.size());
      for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].id == twice[i].id);
      for (std::size_t i = 1; i < once.size(); ++i) CHECK(std::stoi(once[i - 1].id) < std::stoi(once[i].id));
    }
  }

  TEST_CASE("checkpoints round-trip random states") {
    Gen g(909);
    for (int trial = 0; trial < 20; ++trial) {
      auto s = AdapterState::initialize(g.size(1, 40), g.size(1, 40), static_cast<int>(g.size(1, 16)), g.size(0, 99));
      for (auto* group : {&s.lm, &s.itm}) {
        for (auto& [name, t] : *group) {
          for (auto& v : t.values) v = g.real(-1e3, 1e3);
        }
      }
      const auto back = decode_checkpoint(encode_checkpoint(s, Json::object()));
      CHECK(back.state.checksum() == s.checksum());
      CHECK(back.state.text_dim == s.text_dim);
      CHECK(back.state.visual_dim == s.visual_dim);
    }
  }
}
