#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "d2scalar.hpp"

namespace dcgp {

enum class KernelId { add, sub, mul, div, log, sin };

inline constexpr std::array<KernelId, 6> all_kernels { KernelId::add, KernelId::sub, KernelId::mul,
    KernelId::div, KernelId::log, KernelId::sin };

constexpr int arity(KernelId k) noexcept { return (k == KernelId::log || k == KernelId::sin) ? 1 : 2; }

constexpr std::string_view kernel_name(KernelId k) noexcept
{
    switch (k) {
    case KernelId::add: return "add";
    case KernelId::sub: return "sub";
    case KernelId::mul: return "mul";
    case KernelId::div: return "div";
    case KernelId::log: return "log";
    case KernelId::sin: return "sin";
    }
    return "?";
}

// infix operator for binary kernels, function name for unary ones
constexpr std::string_view kernel_symbol(KernelId k) noexcept
{
    switch (k) {
    case KernelId::add: return "+";
    case KernelId::sub: return "-";
    case KernelId::mul: return "*";
    case KernelId::div: return "/";
    case KernelId::log: return "log";
    case KernelId::sin: return "sin";
    }
    return "?";
}

inline std::optional<KernelId> parse_kernel(std::string_view name) noexcept
{
    for (auto k : all_kernels) {
        if (kernel_name(k) == name) { return k; }
    }
    return std::nullopt;
}

/// Ordered, duplicate-free list of kernels. The position of a kernel in the
/// list is its integer encoding in the kernel gene.
class KernelSet {
public:
    KernelSet() = default;

    explicit KernelSet(std::vector<KernelId> kernels)
        : kernels_(std::move(kernels))
    {
        for (std::size_t i = 0; i < kernels_.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (kernels_[i] == kernels_[j]) {
                    throw std::invalid_argument("KernelSet: duplicate kernel '" + std::string(kernel_name(kernels_[i])) + "'");
                }
            }
        }
    }

    static KernelSet from_names(const std::vector<std::string>& names)
    {
        std::vector<KernelId> ks;
        ks.reserve(names.size());
        for (const auto& n : names) {
            auto k = parse_kernel(n);
            if (!k) { throw std::invalid_argument("unknown kernel '" + n + "' (expected add, sub, mul, div, log, sin)"); }
            ks.push_back(*k);
        }
        return KernelSet(std::move(ks));
    }

    [[nodiscard]] std::size_t size() const noexcept { return kernels_.size(); }
    [[nodiscard]] bool empty() const noexcept { return kernels_.empty(); }
    [[nodiscard]] KernelId operator[](std::size_t i) const { return kernels_.at(i); }
    [[nodiscard]] auto begin() const noexcept { return kernels_.begin(); }
    [[nodiscard]] auto end() const noexcept { return kernels_.end(); }

    [[nodiscard]] std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (auto k : kernels_) { out.emplace_back(kernel_name(k)); }
        return out;
    }

    friend bool operator==(const KernelSet&, const KernelSet&) = default;

private:
    std::vector<KernelId> kernels_;
};

// Kernel application. `b` is ignored by unary kernels.

inline void apply_into(KernelId k, double& out, const double& a, const double& b) noexcept
{
    switch (k) {
    case KernelId::add: out = a + b; return;
    case KernelId::sub: out = a - b; return;
    case KernelId::mul: out = a * b; return;
    case KernelId::div: out = a / b; return;
    case KernelId::log: out = std::log(a); return;
    case KernelId::sin: out = std::sin(a); return;
    }
}

inline void apply_into(KernelId k, D2Scalar& out, const D2Scalar& a, const D2Scalar& b)
{
    switch (k) {
    case KernelId::add: add_into(out, a, b); return;
    case KernelId::sub: sub_into(out, a, b); return;
    case KernelId::mul: mul_into(out, a, b); return;
    case KernelId::div: div_into(out, a, b); return;
    case KernelId::log: log_into(out, a); return;
    case KernelId::sin: sin_into(out, a); return;
    }
}

/// Applies kernel `k`. Binary kernels require `b`; unary kernels require it absent.
inline D2Scalar d2_apply(KernelId k, const D2Scalar& a, const D2Scalar* b = nullptr)
{
    if ((arity(k) == 2) != (b != nullptr)) {
        throw std::invalid_argument("d2_apply: wrong operand count for kernel '" + std::string(kernel_name(k)) + "'");
    }
    D2Scalar out;
    apply_into(k, out, a, b ? *b : a);
    return out;
}

inline double apply(KernelId k, double a, double b = 0.0) noexcept
{
    double out {};
    apply_into(k, out, a, b);
    return out;
}

} // namespace dcgp
