#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lemmarec/gradcheck.hpp"
#include "lemmarec/tensor.hpp"

using namespace lemmarec;

namespace {

template <class S>
Tensor<S> random_param(Shape shape, std::uint64_t seed, double stddev = 1.0) {
    Rng rng(seed);
    return Tensor<S>::randn(std::move(shape), rng, stddev);
}

}  // namespace

TEST_CASE("softmax rows sum to one") {
    auto x = random_param<double>({6, 9}, 1);
    auto y = softmax_lastdim(x);
    for (std::size_t r = 0; r < 6; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 9; ++i) sum += y.value()[r * 9 + i];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("gradient of sum of squares is exactly 2x") {
    auto x = random_param<double>({4, 3}, 2);
    auto loss = sum(mul(x, x));
    loss.backward();
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x.grad()[i] == 2.0 * x.value()[i]);  // exact in 64-bit
    }
}

TEST_CASE("gradient through a shared node accumulates") {
    auto x = random_param<double>({5}, 3);
    auto loss = sum(add(mul(x, x), x));
    loss.backward();
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x.grad()[i] == doctest::Approx(2.0 * x.value()[i] + 1.0).epsilon(1e-12));
    }
}

TEST_CASE("matmul gradient matches central finite differences") {
    auto a = random_param<double>({3, 4}, 4);
    const auto b = random_param<double>({4, 5}, 5);
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(matmul(t, b))); }, a, 1e-5, 1e-6);
    CHECK(report.passed);
    CHECK(report.max_rel_error <= 1e-6);

    auto b2 = random_param<double>({4, 5}, 6);
    const auto a2 = random_param<double>({3, 4}, 7);
    const auto report_b = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(matmul(a2, t))); }, b2, 1e-5, 1e-6);
    CHECK(report_b.passed);
}

TEST_CASE("batched matmul against shared and per-batch operands") {
    auto a = random_param<double>({2, 3, 4}, 8);
    const auto w = random_param<double>({4, 2}, 9);
    auto y = matmul(a, w);
    CHECK(y.shape() == Shape{2, 3, 2});
    // spot check one element against a hand loop
    double expect = 0.0;
    for (std::size_t k = 0; k < 4; ++k) expect += a.value()[(1 * 3 + 2) * 4 + k] * w.value()[k * 2 + 1];
    CHECK(y.value()[(1 * 3 + 2) * 2 + 1] == doctest::Approx(expect).epsilon(1e-12));

    const auto b = random_param<double>({2, 4, 3}, 10);
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(matmul(t, b))); }, a, 1e-5, 1e-6);
    CHECK(report.passed);
}

TEST_CASE("matmul shape errors carry both shapes") {
    auto a = Tensor<float>::zeros({2, 3});
    auto b = Tensor<float>::zeros({4, 5});
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(2, 3)"), ShapeError);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(4, 5)"), ShapeError);
}

TEST_CASE("broadcast add of a bias vector") {
    auto x = random_param<double>({2, 3, 4}, 11);
    auto bias = random_param<double>({4}, 12);
    auto y = add(x, bias);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(y.value()[i] == doctest::Approx(x.value()[i] + bias.value()[i % 4]).epsilon(1e-12));
    }
    auto loss = sum(mul(y, y));
    loss.backward();
    // bias gradient reduces over the broadcast axes
    for (std::size_t j = 0; j < 4; ++j) {
        double expect = 0.0;
        for (std::size_t r = 0; r < 6; ++r) expect += 2.0 * y.value()[r * 4 + j];
        CHECK(bias.grad()[j] == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("broadcast with middle axes (attention-mask pattern)") {
    // logits (B, nW, H, T, T) + mask (nW, 1, T, T)
    auto x = random_param<double>({2, 3, 2, 2, 2}, 13);
    auto m = random_param<double>({3, 1, 2, 2}, 14);
    auto y = add(x, m);
    CHECK(y.shape() == x.shape());
    for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t w = 0; w < 3; ++w) {
            for (std::size_t h = 0; h < 2; ++h) {
                for (std::size_t t = 0; t < 4; ++t) {
                    const std::size_t xi = (((b * 3 + w) * 2 + h) * 4) + t;
                    CHECK(y.value()[xi] == doctest::Approx(x.value()[xi] + m.value()[w * 4 + t]).epsilon(1e-12));
                }
            }
        }
    }
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(add(x, t))); }, m, 1e-5, 1e-6);
    CHECK(report.passed);
    auto bad = Tensor<double>::zeros({5, 1});
    CHECK_THROWS_AS(add(x, bad), ShapeError);
}

TEST_CASE("permute, slice, concat, roll round trips and gradients") {
    auto x = random_param<double>({2, 3, 4}, 15);
    auto p = permute(x, {2, 0, 1});
    CHECK(p.shape() == Shape{4, 2, 3});
    CHECK(p.value()[(3 * 2 + 1) * 3 + 2] == x.value()[(1 * 3 + 2) * 4 + 3]);

    const auto rep_p = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(permute(t, {2, 0, 1}))); }, x, 1e-5, 1e-6);
    CHECK(rep_p.passed);

    auto s = slice(x, 1, 1, 3);
    CHECK(s.shape() == Shape{2, 2, 4});
    const auto rep_s = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(slice(t, 1, 1, 3))); }, x, 1e-5, 1e-6);
    CHECK(rep_s.passed);

    auto c = concat<double>({slice(x, 1, 0, 1), slice(x, 1, 1, 3)}, 1);
    CHECK(c.shape() == x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(c.value()[i] == x.value()[i]);

    auto r = roll(x, 1, 2);
    auto rr = roll(r, 1, -2);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(rr.value()[i] == x.value()[i]);
    const auto rep_r = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(roll(t, 2, 3))); }, x, 1e-5, 1e-6);
    CHECK(rep_r.passed);
}

TEST_CASE("grad_check on a linear function reports zero error") {
    auto x = random_param<double>({3, 3}, 16);
    const auto report = grad_check([](const Tensor<double>& t) { return sum(t); }, x, 1e-5, 1e-9);
    CHECK(report.passed);
    CHECK(report.max_rel_error == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("grad_check flags an intentionally broken backward") {
    auto x = random_param<double>({4}, 17);
    auto broken_square = [](const Tensor<double>& t) {
        std::vector<double> value(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) value[i] = t.value()[i] * t.value()[i];
        auto t_node = t.node();
        auto y = detail::make_result<double>(t.shape(), std::move(value), {t},
                                             [t_node](Tensor<double>::Node& self) {
                                                 Tensor<double>::ensure_grad(*t_node);
                                                 for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                                     // wrong: forgets the factor 2
                                                     t_node->grad[i] += self.grad[i] * t_node->value[i];
                                                 }
                                             });
        return sum(y);
    };
    const auto report = grad_check(broken_square, x, 1e-5, 1e-4);
    CHECK_FALSE(report.passed);
}

TEST_CASE("grad_check rejects non-scalar functions") {
    auto x = random_param<double>({3}, 18);
    CHECK_THROWS_AS(grad_check([](const Tensor<double>& t) { return mul(t, t); }, x, 1e-5, 1e-4), ShapeError);
}

TEST_CASE("layer_norm gradient within 1e-5") {
    auto x = random_param<double>({4, 8}, 19);
    const auto gamma = random_param<double>({8}, 20, 0.5);
    const auto beta = random_param<double>({8}, 21, 0.5);
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(layer_norm(t, gamma, beta))); }, x, 1e-5, 1e-5);
    CHECK(report.passed);

    auto gamma2 = random_param<double>({8}, 22, 0.5);
    const auto x2 = random_param<double>({4, 8}, 23);
    const auto beta2 = random_param<double>({8}, 24, 0.5);
    const auto rep_g = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(layer_norm(x2, t, beta2))); }, gamma2, 1e-5, 1e-5);
    CHECK(rep_g.passed);
}

TEST_CASE("embedding lookup forward and gradient") {
    auto table = random_param<double>({7, 3}, 25);
    IntTensor ids({2, 2}, {1, 5, 5, 0});
    auto e = embedding_lookup(table, ids);
    CHECK(e.shape() == Shape{2, 2, 3});
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(e.value()[0 * 3 + j] == table.value()[1 * 3 + j]);
        CHECK(e.value()[1 * 3 + j] == table.value()[5 * 3 + j]);
    }
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return sum(gelu(embedding_lookup(t, ids))); }, table, 1e-5, 1e-6);
    CHECK(report.passed);
    IntTensor bad({1}, {9});
    CHECK_THROWS_AS(embedding_lookup(table, bad), ShapeError);
}

TEST_CASE("cross entropy closed forms") {
    // uniform logits over V=260 -> ln 260
    auto logits = Tensor<double>::zeros({2, 260});
    IntTensor targets({2}, {5, 17});
    auto loss = cross_entropy_with_logits(logits, targets, /*pad_id=*/0);
    CHECK(loss.item() == doctest::Approx(std::log(260.0)).epsilon(1e-9));

    // near one-hot logits on the target -> loss ~ 0
    std::vector<double> sharp(2 * 4, 0.0);
    sharp[0 * 4 + 2] = 50.0;
    sharp[1 * 4 + 1] = 50.0;
    auto sharp_logits = Tensor<double>::from({2, 4}, sharp);
    IntTensor sharp_targets({2}, {2, 1});
    CHECK(cross_entropy_with_logits(sharp_logits, sharp_targets, 0).item() == doctest::Approx(0.0).epsilon(1e-9));

    // two classes with logit gap g on the true class -> ln(1 + e^-g)
    auto two = Tensor<double>::from({1, 2}, {1.0, 0.0});
    IntTensor t0({1}, {0});
    CHECK(cross_entropy_with_logits(two, t0, -1).item() ==
          doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-9));
    CHECK(cross_entropy_with_logits(two, t0, -1).item() == doctest::Approx(0.3133).epsilon(1e-4));
}

TEST_CASE("cross entropy ignores pad positions and rejects all-pad batches") {
    auto logits = random_param<double>({3, 5}, 26);
    IntTensor targets({3}, {0, 2, 0});  // pad_id = 0 masks rows 0 and 2
    auto loss = cross_entropy_with_logits(logits, targets, 0);
    IntTensor only({1}, {2});
    auto row = slice(logits, 0, 1, 2);
    CHECK(loss.item() == doctest::Approx(cross_entropy_with_logits(row, only, 0).item()).epsilon(1e-12));

    IntTensor all_pad({3}, {0, 0, 0});
    CHECK_THROWS_AS(cross_entropy_with_logits(logits, all_pad, 0), NumericError);
}

TEST_CASE("cross entropy gradient matches finite differences") {
    auto logits = random_param<double>({4, 6}, 27);
    IntTensor targets({4}, {1, 0, 3, 5});  // includes one pad row
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return cross_entropy_with_logits(t, targets, 0); }, logits, 1e-6, 1e-6);
    CHECK(report.passed);
}

TEST_CASE("softmax gradient matches finite differences") {
    auto x = random_param<double>({3, 5}, 28);
    const auto w = random_param<double>({3, 5}, 29);
    const auto report = grad_check(
        [&](const Tensor<double>& t) { return sum(mul(softmax_lastdim(t), w)); }, x, 1e-6, 1e-6);
    CHECK(report.passed);
}

TEST_CASE("no-grad mode skips tape recording") {
    auto x = random_param<double>({3}, 30);
    NoGradGuard guard;
    auto y = mul(x, x);
    CHECK_FALSE(y.requires_grad());
    CHECK(y.node()->parents.empty());
}

TEST_CASE("forward is bit-deterministic") {
    auto run = [] {
        auto x = random_param<float>({8, 8}, 31);
        const auto w = random_param<float>({8, 8}, 32);
        const auto g = random_param<float>({8}, 33);
        const auto b = random_param<float>({8}, 34);
        return layer_norm(gelu(matmul(x, w)), g, b).value();
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
