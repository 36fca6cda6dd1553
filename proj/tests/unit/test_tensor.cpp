#include "lobcast/error.hpp"
#include "lobcast/grad_check.hpp"
#include "lobcast/ops.hpp"
#include "lobcast/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lobcast;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(v), true);
}

// Values kept at least 1e-3 away from the ReLU kink.
Tensor random_away_from_zero(Shape shape, Rng& rng) {
    auto t = random_tensor(std::move(shape), rng);
    for (auto& x : t.mutable_values()) {
        if (std::abs(x) < 1e-3) x = x < 0 ? -0.5 : 0.5;
    }
    return t;
}

void expect_values(const Tensor& t, std::vector<double> expected, double tol = 1e-12) {
    ASSERT_EQ(t.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(t.values()[i], expected[i], tol) << "at " << i;
}

}  // namespace

TEST(Matmul, IdentityLeavesOperandUnchanged) {
    auto eye = Tensor::from_rows({{1, 0}, {0, 1}});
    auto m = Tensor::from_rows({{1.5, -2}, {3, 4.25}});
    expect_values(matmul(eye, m), {1.5, -2, 3, 4.25}, 0.0);
}

TEST(Matmul, RowTimesColumn) {
    auto out = matmul(Tensor::from_rows({{1, 2}}), Tensor::from_rows({{3}, {4}}));
    EXPECT_EQ(out.shape(), (Shape{1, 1}));
    EXPECT_EQ(out.item(), 11.0);
}

TEST(Matmul, InnerExtentMismatchThrows) {
    try {
        matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}));
        FAIL() << "expected ShapeMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
}

TEST(Matmul, GradientOfSumIsOnesTimesBTransposed) {
    Rng rng(1);
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 2}, rng);
    backward(sum_all(matmul(a, b)));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double expected = b.at({k, 0}) + b.at({k, 1});
            EXPECT_NEAR(a.grad()[i * 4 + k], expected, 1e-14);
        }
    }
    Tensor inputs[] = {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)};
    auto result = grad_check([&] { return sum_all(matmul(inputs[0], inputs[1])); }, inputs, 1e-6);
    EXPECT_LT(result.max_rel_error, 1e-6);
}

TEST(Matmul, BatchedBroadcastGradients) {
    Rng rng(2);
    Tensor inputs[] = {random_tensor({3, 2, 4}, rng), random_tensor({4, 5}, rng)};
    auto result = grad_check([&] { return sum_all(square(matmul(inputs[0], inputs[1]))); }, inputs);
    EXPECT_LT(result.max_rel_error, 1e-5);
}

TEST(Softmax, UniformInputGivesUniformOutput) {
    expect_values(softmax(Tensor::vector({0, 0, 0}), 0), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
}

TEST(Softmax, LargeInputsDoNotOverflow) {
    auto out = softmax(Tensor::vector({1000, 0}), 0);
    EXPECT_TRUE(std::isfinite(out.values()[0]));
    EXPECT_NEAR(out.values()[0], 1.0, 1e-15);
    EXPECT_NEAR(out.values()[1], 0.0, 1e-15);
}

TEST(Softmax, LogInputsRecoverProportions) {
    expect_values(softmax(Tensor::vector({std::log(1.0), std::log(2.0), std::log(3.0)}), 0),
                  {1.0 / 6, 2.0 / 6, 3.0 / 6}, 1e-15);
}

TEST(Softmax, RowsSumToOneAndAreNonNegative) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_tensor({4, 7}, rng, -30, 30);
        for (std::size_t axis : {0u, 1u}) {
            auto y = softmax(x, axis);
            const std::size_t other = 1 - axis;
            for (std::size_t o = 0; o < x.dim(other); ++o) {
                double total = 0.0;
                for (std::size_t e = 0; e < x.dim(axis); ++e) {
                    const double v = axis == 1 ? y.at({o, e}) : y.at({e, o});
                    EXPECT_GE(v, 0.0);
                    total += v;
                }
                EXPECT_NEAR(total, 1.0, 1e-12);
            }
        }
    }
}

TEST(Softmax, ComposedWithMatmulPassesGradCheck) {
    Rng rng(4);
    Tensor inputs[] = {random_tensor({3, 4}, rng), random_tensor({4, 3}, rng), random_tensor({3, 2}, rng)};
    auto f = [&] {
        return sum_all(square(matmul(softmax(matmul(inputs[0], inputs[1]), 1), inputs[2])));
    };
    EXPECT_LT(grad_check(f, inputs).max_rel_error, 1e-6);
}

TEST(Relu, ClampsNegativesAndZero) { expect_values(relu(Tensor::vector({-1, 0, 2})), {0, 0, 2}, 0.0); }

TEST(Relu, GradientIsIndicatorOfPositive) {
    auto x = Tensor::vector({-1, 0, 2, 3}, true);
    backward(sum_all(relu(x)));
    expect_values(Tensor::vector(std::vector<double>(x.grad().begin(), x.grad().end())), {0, 0, 1, 1}, 0.0);
}

TEST(Relu, GradCheckAwayFromKink) {
    Rng rng(5);
    auto x = random_away_from_zero({12}, rng);
    auto result = grad_check([](const Tensor& t) { return sum_all(square(relu(t))); }, x);
    EXPECT_LT(result.max_rel_error, 1e-6);
}

TEST(Elementwise, GatherRowsScatterAddsRepeatedIndices) {
    auto table = Tensor::from_rows({{1, 2}, {3, 4}}, true);
    const std::size_t idx[] = {0, 0};
    auto rows = gather_rows(table, idx);
    expect_values(rows, {1, 2, 1, 2}, 0.0);
    backward(sum_all(rows));
    expect_values(Tensor::vector(std::vector<double>(table.grad().begin(), table.grad().end())), {2, 2, 0, 0}, 0.0);
}

TEST(Elementwise, GatherRowsOutOfRangeThrows) {
    const std::size_t idx[] = {2};
    try {
        gather_rows(Tensor::zeros({2, 3}), idx);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
    }
}

TEST(Elementwise, ReshapePreservesOrder) {
    auto x = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
    auto y = reshape(x, {3, 2});
    EXPECT_EQ(y.shape(), (Shape{3, 2}));
    expect_values(y, {1, 2, 3, 4, 5, 6}, 0.0);
}

TEST(Elementwise, MeanOfOnesIsOnesOfReducedShape) {
    auto y = mean(Tensor::full({2, 3, 4}, 1.0), 1);
    EXPECT_EQ(y.shape(), (Shape{2, 4}));
    for (double v : y.values()) EXPECT_EQ(v, 1.0);
}

TEST(Elementwise, TransposeAndConcat) {
    auto x = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
    expect_values(transpose(x), {1, 4, 2, 5, 3, 6}, 0.0);
    const Tensor parts[] = {x, Tensor::from_rows({{7, 8, 9}})};
    auto c = concat(parts, 0);
    EXPECT_EQ(c.shape(), (Shape{3, 3}));
    expect_values(c, {1, 2, 3, 4, 5, 6, 7, 8, 9}, 0.0);
    const Tensor cols[] = {x, Tensor::from_rows({{0}, {-1}})};
    expect_values(concat(cols, 1), {1, 2, 3, 0, 4, 5, 6, -1}, 0.0);
}

TEST(Elementwise, BroadcastAddMatchesLoop) {
    auto a = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
    auto b = Tensor::vector({10, 20, 30});
    expect_values(add(a, b), {11, 22, 33, 14, 25, 36}, 0.0);
    auto c = Tensor::from_rows({{100}, {200}});
    expect_values(add(a, c), {101, 102, 103, 204, 205, 206}, 0.0);
}

// Every differentiable op against central differences on inputs in [-2, 2].
TEST(GradCheck, EveryOperationBelowTolerance) {
    Rng rng(11);
    const std::size_t idx[] = {2, 0, 2, 1};
    const std::size_t cols[] = {3, 0, 3};
    using Builder = std::function<Tensor(std::span<Tensor>)>;
    struct Case {
        const char* name;
        std::vector<Shape> shapes;
        Builder f;
    };
    const std::vector<Case> cases = {
        {"add", {{3, 4}, {4}}, [](auto in) { return sum_all(square(add(in[0], in[1]))); }},
        {"sub", {{3, 4}, {3, 1}}, [](auto in) { return sum_all(square(sub(in[0], in[1]))); }},
        {"mul", {{2, 3}, {2, 3}}, [](auto in) { return sum_all(mul(in[0], in[1])); }},
        {"div", {{2, 3}, {2, 3}}, [](auto in) { return sum_all(div(in[0], add_scalar(square(in[1]), 1.0))); }},
        {"scale", {{5}}, [](auto in) { return sum_all(square(scale(in[0], -1.7))); }},
        {"sin", {{6}}, [](auto in) { return sum_all(sin(in[0])); }},
        {"mean", {{3, 4}}, [](auto in) { return sum_all(square(mean(in[0], 0))); }},
        {"sum", {{3, 4}}, [](auto in) { return sum_all(square(sum(in[0], 1))); }},
        {"concat", {{2, 3}, {1, 3}},
         [](auto in) {
             const Tensor parts[] = {in[0], in[1]};
             return sum_all(square(concat(parts, 0)));
         }},
        {"transpose", {{2, 3, 4}}, [](auto in) { return sum_all(mul(transpose(in[0], 0, 2), transpose(in[0], 0, 2))); }},
        {"reshape", {{2, 6}}, [](auto in) { return sum_all(square(matmul(reshape(in[0], {3, 4}), reshape(in[0], {4, 3})))); }},
        {"gather_rows", {{3, 2}}, [&](auto in) { return sum_all(square(gather_rows(in[0], idx))); }},
        {"gather_cols", {{2, 4}}, [&](auto in) { return sum_all(square(gather_cols(in[0], cols))); }},
        {"cumprod_rows", {{4, 3}}, [](auto in) { return sum_all(cumprod_rows(in[0])); }},
        {"layer_norm", {{3, 5}, {5}, {5}}, [](auto in) { return sum_all(square(layer_norm(in[0], in[1], in[2]))); }},
        {"linear", {{4, 3}, {3, 2}, {2}}, [](auto in) { return sum_all(square(linear(in[0], in[1], in[2]))); }},
        {"softmax", {{3, 4}}, [](auto in) { return sum_all(square(softmax(in[0], 0))); }},
    };
    for (const auto& c : cases) {
        std::vector<Tensor> inputs;
        for (const auto& s : c.shapes) inputs.push_back(random_tensor(s, rng));
        auto result = grad_check([&] { return c.f(inputs); }, inputs, 1e-6);
        EXPECT_LT(result.max_rel_error, 1e-5) << c.name;
    }
}

TEST(GradCheck, QuadraticIsNearlyExact) {
    Rng rng(12);
    auto x = random_tensor({10}, rng);
    auto result = grad_check([](const Tensor& t) { return sum_all(square(t)); }, x);
    EXPECT_LT(result.max_rel_error, 1e-8);
}

TEST(Backward, NonScalarLossThrows) {
    auto x = Tensor::vector({1, 2}, true);
    try {
        backward(scale(x, 2.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonScalarLoss);
    }
}

TEST(Backward, SecondCallThrows) {
    auto x = Tensor::vector({1, 2}, true);
    auto loss = sum_all(square(x));
    backward(loss);
    try {
        backward(loss);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DoubleBackward);
    }
}

TEST(Backward, SharedSubgraphVisitedOnce) {
    auto x = Tensor::scalar(3.0, true);
    auto y = mul(x, x);
    backward(add(y, y));  // d/dx 2x^2 = 4x
    EXPECT_EQ(x.grad()[0], 12.0);
}

TEST(Backward, ReplayIsBitIdentical) {
    auto run = [] {
        Rng rng(99);
        auto a = init_uniform({4, 5}, 5, rng);
        auto b = init_uniform({5, 3}, 3, rng);
        auto loss = sum_all(square(softmax(matmul(a, b), 1)));
        backward(loss);
        std::vector<double> out{loss.item()};
        out.insert(out.end(), a.grad().begin(), a.grad().end());
        out.insert(out.end(), b.grad().begin(), b.grad().end());
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(Init, UniformWithinFanInBound) {
    Rng rng(5);
    auto w = init_uniform({16, 9}, 16, rng);
    EXPECT_TRUE(w.requires_grad());
    for (double v : w.values()) EXPECT_LE(std::abs(v), 0.25);
}

TEST(Rng, StateRoundTripReproducesStream) {
    Rng a(42);
    a.normal();
    const auto saved = a.state();
    std::vector<double> first;
    for (int i = 0; i < 5; ++i) first.push_back(a.normal());
    Rng b(0);
    b.restore(saved);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(b.normal(), first[static_cast<std::size_t>(i)]);
}
