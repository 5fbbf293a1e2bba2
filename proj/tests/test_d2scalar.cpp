#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dcgp/d2scalar.hpp"
#include "dcgp/kernels.hpp"
#include "oracles.hpp"

using namespace dcgp;

namespace {

void expect_symmetric(const D2Scalar& s)
{
    for (std::size_t j = 0; j < s.size(); ++j) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (std::isnan(s.hess(j, k))) {
                EXPECT_TRUE(std::isnan(s.hess(k, j)));
            } else {
                EXPECT_EQ(s.hess(j, k), s.hess(k, j));
            }
        }
    }
}

// operand as a smooth polynomial of the variables: p0 + p1 c0 + p2 c1 c2 + p3 c0^2
struct Poly {
    double p[4];
    double plain(const std::vector<double>& c) const { return p[0] + p[1] * c[0] + p[2] * c[1] * c[2] + p[3] * c[0] * c[0]; }
    D2Scalar dual(const std::vector<double>& c) const
    {
        const std::size_t m = 3;
        auto k = [&](double v) { return d2_constant(v, m); };
        auto c0 = d2_seed(c[0], 0, m), c1 = d2_seed(c[1], 1, m), c2 = d2_seed(c[2], 2, m);
        return k(p[0]) + k(p[1]) * c0 + k(p[2]) * c1 * c2 + k(p[3]) * c0 * c0;
    }
};

} // namespace

TEST(D2Scalar, ConstantHasNoSensitivity)
{
    auto a = d2_constant(5.0, 2);
    EXPECT_EQ(a.value(), 5.0);
    ASSERT_EQ(a.grad().size(), 2u);
    EXPECT_EQ(a.grad(0), 0.0);
    EXPECT_EQ(a.grad(1), 0.0);
    for (double h : a.hess()) { EXPECT_EQ(h, 0.0); }

    auto z = d2_constant(0.0, 0);
    EXPECT_EQ(z.value(), 0.0);
    EXPECT_TRUE(z.grad().empty());
    EXPECT_TRUE(z.hess().empty());

    auto n = d2_constant(-1.5, 3);
    EXPECT_EQ(n.value(), -1.5);
    EXPECT_EQ(n.grad().size(), 3u);
}

TEST(D2Scalar, SeedIsUnitVector)
{
    auto a = d2_seed(2.0, 0, 2);
    EXPECT_EQ(a.value(), 2.0);
    EXPECT_EQ(a.grad(0), 1.0);
    EXPECT_EQ(a.grad(1), 0.0);

    auto b = d2_seed(-3.0, 1, 2);
    EXPECT_EQ(b.grad(0), 0.0);
    EXPECT_EQ(b.grad(1), 1.0);
    for (double h : b.hess()) { EXPECT_EQ(h, 0.0); }

    EXPECT_THROW(d2_seed(7.0, 2, 2), std::out_of_range);
}

TEST(D2Scalar, ProductRule)
{
    auto a = d2_seed(2, 0, 2);
    auto b = d2_seed(3, 1, 2);
    auto p = d2_apply(KernelId::mul, a, &b);
    EXPECT_EQ(p.value(), 6.0);
    EXPECT_EQ(p.grad(0), 3.0);
    EXPECT_EQ(p.grad(1), 2.0);
    EXPECT_EQ(p.hess(0, 1), 1.0);
    EXPECT_EQ(p.hess(1, 0), 1.0);
    EXPECT_EQ(p.hess(0, 0), 0.0);
    EXPECT_EQ(p.hess(1, 1), 0.0);
}

TEST(D2Scalar, LogAtOne)
{
    auto r = d2_apply(KernelId::log, d2_seed(1, 0, 1));
    EXPECT_EQ(r.value(), 0.0);
    EXPECT_EQ(r.grad(0), 1.0);
    EXPECT_EQ(r.hess(0, 0), -1.0);
}

TEST(D2Scalar, DivisionByZeroPropagates)
{
    auto one = d2_constant(1, 1);
    auto zero = d2_constant(0, 1);
    D2Scalar r;
    ASSERT_NO_THROW(r = d2_apply(KernelId::div, one, &zero));
    EXPECT_FALSE(std::isfinite(r.value()));
    // computation continues on the non-finite value
    auto s = d2_apply(KernelId::add, r, &one);
    EXPECT_FALSE(std::isfinite(s.value()));
}

TEST(D2Scalar, DimensionMismatchThrows)
{
    auto a = d2_constant(1, 2);
    auto b = d2_constant(1, 3);
    EXPECT_THROW(d2_apply(KernelId::add, a, &b), std::invalid_argument);
    EXPECT_THROW(d2_apply(KernelId::mul, a, &b), std::invalid_argument);
    EXPECT_THROW(d2_apply(KernelId::add, a), std::invalid_argument);
    EXPECT_THROW(d2_apply(KernelId::sin, a, &a), std::invalid_argument);
}

TEST(D2Scalar, KernelsMatchFiniteDifferences)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    std::uniform_real_distribution<double> var(-1.5, 1.5);
    int checked = 0;
    for (auto k : all_kernels) {
        for (int trial = 0; trial < 200; ++trial) {
            Poly a { { coef(rng), coef(rng), coef(rng), coef(rng) } };
            Poly b { { coef(rng), coef(rng), coef(rng), coef(rng) } };
            std::vector<double> c { var(rng), var(rng), var(rng) };
            const double av = a.plain(c), bv = b.plain(c);
            if (std::fabs(av) > 10 || std::fabs(bv) > 10) { continue; }
            if (k == KernelId::log && av < 0.2) { continue; }
            if (k == KernelId::div && std::fabs(bv) < 0.2) { continue; }

            auto f = [&](const std::vector<double>& cc) { return apply(k, a.plain(cc), b.plain(cc)); };
            const D2Scalar ad = a.dual(c), bd = b.dual(c);
            const D2Scalar r = arity(k) == 2 ? d2_apply(k, ad, &bd) : d2_apply(k, ad);

            EXPECT_EQ(r.value(), f(c));
            const auto g = oracle::fd_gradient(f, c);
            const auto h = oracle::fd_hessian(f, c);
            std::vector<double> rg(r.grad().begin(), r.grad().end());
            std::vector<double> rh(r.hess().begin(), r.hess().end());
            EXPECT_LT(oracle::max_rel_err(rg, g), 1e-6) << kernel_name(k);
            EXPECT_LT(oracle::max_rel_err(rh, h), 1e-4) << kernel_name(k);
            expect_symmetric(r);
            ++checked;
        }
    }
    EXPECT_GT(checked, 600);
}

TEST(D2Scalar, ZeroVariablesReducesToPlainArithmetic)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = u(rng), y = u(rng), z = u(rng);
        const double plain = std::sin(x * y - z) / (std::log(std::fabs(x) + 1.0) + y);
        auto X = d2_constant(x, 0), Y = d2_constant(y, 0), Z = d2_constant(z, 0);
        auto A = d2_constant(std::fabs(x) + 1.0, 0);
        const D2Scalar dual = sin(X * Y - Z) / (log(A) + Y);
        EXPECT_EQ(dual.value(), plain);
    }
}
