#pragma once

/**
 * @file dataset.hpp
 * @brief Tabular data: CSV ingestion, feature scaling, splits, error metrics
 * and the ordinary-least-squares linear baseline.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace dcgp {

enum class ColumnRole { feature, target, lower_bound, upper_bound, ignored };
enum class ScalingKind { none, standardize, std_divide };

struct ColumnSpec {
    std::string name;
    ColumnRole role = ColumnRole::feature;
    ScalingKind scaling = ScalingKind::none;
};

struct ColumnScaling {
    ScalingKind kind = ScalingKind::none;
    double mean = 0.0;
    double std = 1.0;

    [[nodiscard]] double forward(double v) const noexcept
    {
        switch (kind) {
        case ScalingKind::standardize: return (v - mean) / std;
        case ScalingKind::std_divide: return v / std;
        case ScalingKind::none: break;
        }
        return v;
    }

    [[nodiscard]] double inverse(double v) const noexcept
    {
        switch (kind) {
        case ScalingKind::standardize: return v * std + mean;
        case ScalingKind::std_divide: return v * std;
        case ScalingKind::none: break;
        }
        return v;
    }
};

/// One entry per feature column, in feature order.
using ScalingState = std::vector<ColumnScaling>;

inline std::string_view scaling_name(ScalingKind k) noexcept
{
    switch (k) {
    case ScalingKind::standardize: return "standardize";
    case ScalingKind::std_divide: return "std_divide";
    case ScalingKind::none: break;
    }
    return "none";
}

inline std::optional<ScalingKind> parse_scaling(std::string_view s) noexcept
{
    if (s == "none") { return ScalingKind::none; }
    if (s == "standardize") { return ScalingKind::standardize; }
    if (s == "std_divide") { return ScalingKind::std_divide; }
    return std::nullopt;
}

/// Labelled samples. Features are stored row-major (N x n).
struct Dataset {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::vector<double> features;
    std::vector<double> targets;
    std::vector<double> lower; // empty when the data carries no bounds
    std::vector<double> upper;
    std::vector<std::string> feature_names;
    std::string target_name = "y";
    std::string lower_name;
    std::string upper_name;
    ScalingState scaling; // empty when unscaled

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept
    {
        return { features.data() + i * n_features, n_features };
    }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept { return features[i * n_features + j]; }
    [[nodiscard]] bool has_bounds() const noexcept { return !lower.empty(); }

    /// Builds a dataset from row vectors; names default to x0..x{n-1}.
    static Dataset from_rows(const std::vector<std::vector<double>>& x, std::vector<double> y, std::vector<std::string> names = {})
    {
        Dataset d;
        d.n_rows = x.size();
        d.n_features = x.empty() ? 0 : x.front().size();
        for (const auto& r : x) {
            if (r.size() != d.n_features) { throw DataError("Dataset::from_rows: ragged feature rows"); }
            d.features.insert(d.features.end(), r.begin(), r.end());
        }
        d.targets = std::move(y);
        if (names.empty()) {
            for (std::size_t j = 0; j < d.n_features; ++j) { names.push_back("x" + std::to_string(j)); }
        }
        d.feature_names = std::move(names);
        d.check();
        return d;
    }

    void check() const
    {
        if (n_rows < 1) { throw DataError("dataset is empty"); }
        if (features.size() != n_rows * n_features || targets.size() != n_rows) {
            throw DataError("dataset: inconsistent dimensions");
        }
        if (feature_names.size() != n_features) { throw DataError("dataset: feature name count mismatch"); }
        auto finite = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }); };
        if (!finite(features) || !finite(targets) || !finite(lower) || !finite(upper)) {
            throw DataError("dataset: non-finite entries");
        }
        if (lower.size() != upper.size() || (!lower.empty() && lower.size() != n_rows)) {
            throw DataError("dataset: bounds must be both present with one entry per row");
        }
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (!(lower[i] <= targets[i] && targets[i] <= upper[i])) {
                throw DataError("dataset: row " + std::to_string(i + 1) + " violates lower <= target <= upper");
            }
        }
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) { cells.push_back(cell); }
    if (!line.empty() && line.back() == ',') { cells.emplace_back(); }
    return cells;
}

inline std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) { return {}; }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::optional<double> parse_number(std::string_view s) noexcept
{
    if (!s.empty() && s.front() == '+') { s.remove_prefix(1); }
    double v {};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc {} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) { return std::nullopt; }
    return v;
}

} // namespace detail

/**
 * Reads a comma-separated file with a header row. Only columns named in `specs`
 * are used; unknown extra columns are ignored. Rows with a missing, non-numeric
 * or non-finite value in a used column are rejected with a DataError naming the
 * data row (1-based) and the column.
 */
inline Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& specs)
{
    std::ifstream in(path);
    if (!in) { throw DataError("cannot open dataset file '" + path + "'"); }

    std::string line;
    if (!std::getline(in, line)) { throw DataError("dataset '" + path + "' has no header row"); }
    auto header = detail::split_csv_line(line);
    for (auto& h : header) { h = detail::trim(h); }
    if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) { header.front().erase(0, 3); }

    Dataset d;
    std::vector<std::size_t> feature_cols;
    std::optional<std::size_t> target_col, lower_col, upper_col;
    for (const auto& spec : specs) {
        if (spec.role == ColumnRole::ignored) { continue; }
        auto it = std::find(header.begin(), header.end(), spec.name);
        if (it == header.end()) { throw DataError("dataset '" + path + "': missing column '" + spec.name + "'"); }
        const auto col = static_cast<std::size_t>(it - header.begin());
        switch (spec.role) {
        case ColumnRole::feature:
            feature_cols.push_back(col);
            d.feature_names.push_back(spec.name);
            break;
        case ColumnRole::target:
            if (target_col) { throw DataError("column specs name more than one target"); }
            target_col = col;
            d.target_name = spec.name;
            break;
        case ColumnRole::lower_bound:
            lower_col = col;
            d.lower_name = spec.name;
            break;
        case ColumnRole::upper_bound:
            upper_col = col;
            d.upper_name = spec.name;
            break;
        case ColumnRole::ignored: break;
        }
    }
    if (!target_col) { throw DataError("column specs name no target"); }
    if (lower_col.has_value() != upper_col.has_value()) { throw DataError("bounds columns must be both present or both absent"); }
    if (feature_cols.empty()) { throw DataError("column specs name no feature"); }
    d.n_features = feature_cols.size();

    auto cell_value = [&](const std::vector<std::string>& cells, std::size_t col, std::size_t row) {
        const std::string raw = col < cells.size() ? detail::trim(cells[col]) : std::string {};
        auto v = detail::parse_number(raw);
        if (!v) {
            throw DataError("dataset '" + path + "': row " + std::to_string(row) + ", column '" + header[col]
                + "': invalid value '" + raw + "'");
        }
        return *v;
    };

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) { continue; }
        ++row;
        const auto cells = detail::split_csv_line(line);
        for (auto c : feature_cols) { d.features.push_back(cell_value(cells, c, row)); }
        d.targets.push_back(cell_value(cells, *target_col, row));
        if (lower_col) {
            d.lower.push_back(cell_value(cells, *lower_col, row));
            d.upper.push_back(cell_value(cells, *upper_col, row));
        }
    }
    d.n_rows = row;
    if (d.n_rows == 0) { throw DataError("dataset '" + path + "' contains no data rows"); }
    d.check();
    return d;
}

/// Writes features, target and (if present) bounds with a header row.
inline void write_csv(const std::string& path, const Dataset& d)
{
    std::ofstream out(path);
    if (!out) { throw DataError("cannot write '" + path + "'"); }
    out.precision(17);
    for (const auto& n : d.feature_names) { out << n << ','; }
    out << d.target_name;
    if (d.has_bounds()) { out << ',' << d.lower_name << ',' << d.upper_name; }
    out << '\n';
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        for (std::size_t j = 0; j < d.n_features; ++j) { out << d.at(i, j) << ','; }
        out << d.targets[i];
        if (d.has_bounds()) { out << ',' << d.lower[i] << ',' << d.upper[i]; }
        out << '\n';
    }
}

/// Column scaling parameters estimated on `train` (population standard deviation).
inline ScalingState fit_scaling(const Dataset& train, const std::vector<ColumnSpec>& specs)
{
    ScalingState state(train.n_features);
    for (const auto& spec : specs) {
        if (spec.role != ColumnRole::feature || spec.scaling == ScalingKind::none) { continue; }
        auto it = std::find(train.feature_names.begin(), train.feature_names.end(), spec.name);
        if (it == train.feature_names.end()) { throw DataError("fit_scaling: unknown feature '" + spec.name + "'"); }
        const auto j = static_cast<std::size_t>(it - train.feature_names.begin());
        double mean = 0.0;
        for (std::size_t i = 0; i < train.n_rows; ++i) { mean += train.at(i, j); }
        mean /= static_cast<double>(train.n_rows);
        double var = 0.0;
        for (std::size_t i = 0; i < train.n_rows; ++i) {
            const double d = train.at(i, j) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(train.n_rows));
        if (!(sd > 0.0)) { throw DataError("fit_scaling: column '" + spec.name + "' has zero variance"); }
        state[j] = { spec.scaling, mean, sd };
    }
    return state;
}

inline Dataset apply_scaling(Dataset data, const ScalingState& state)
{
    if (state.empty()) { return data; }
    if (state.size() != data.n_features) { throw DataError("apply_scaling: scaling state does not match feature count"); }
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        for (std::size_t j = 0; j < data.n_features; ++j) {
            auto& v = data.features[i * data.n_features + j];
            v = state[j].forward(v);
        }
    }
    data.scaling = state;
    return data;
}

/// Inverse of apply_scaling using the state stored in `data`.
inline Dataset remove_scaling(Dataset data)
{
    for (std::size_t i = 0; i < data.n_rows && !data.scaling.empty(); ++i) {
        for (std::size_t j = 0; j < data.n_features; ++j) {
            auto& v = data.features[i * data.n_features + j];
            v = data.scaling[j].inverse(v);
        }
    }
    data.scaling.clear();
    return data;
}

inline Dataset select_rows(const Dataset& d, const std::vector<std::size_t>& rows)
{
    Dataset out = d;
    out.n_rows = rows.size();
    out.features.clear();
    out.targets.clear();
    out.lower.clear();
    out.upper.clear();
    for (auto i : rows) {
        auto r = d.row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.targets.push_back(d.targets[i]);
        if (d.has_bounds()) {
            out.lower.push_back(d.lower[i]);
            out.upper.push_back(d.upper[i]);
        }
    }
    return out;
}

/// Seeded random 80/20 train/test split.
inline std::pair<Dataset, Dataset> random_split(const Dataset& d, std::uint64_t seed, double train_fraction = 0.8)
{
    std::vector<std::size_t> idx(d.n_rows);
    std::iota(idx.begin(), idx.end(), std::size_t { 0 });
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.n_rows)));
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return { select_rows(d, train), select_rows(d, test) };
}

struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;

    [[nodiscard]] double predict(std::span<const double> x) const
    {
        double s = intercept;
        for (std::size_t j = 0; j < coefficients.size(); ++j) { s += coefficients[j] * x[j]; }
        return s;
    }

    [[nodiscard]] std::vector<double> predict(const Dataset& d) const
    {
        std::vector<double> out(d.n_rows);
        for (std::size_t i = 0; i < d.n_rows; ++i) { out[i] = predict(d.row(i)); }
        return out;
    }
};

/// Ordinary least squares on [features | 1] via the normal equations.
inline LinearModel fit_linear(const Dataset& train)
{
    const std::size_t n = train.n_features;
    const std::size_t p = n + 1;
    if (train.n_rows <= p) {
        throw NumericalError("fit_linear: need more than " + std::to_string(p) + " rows, got " + std::to_string(train.n_rows));
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::VectorXd xi(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < train.n_rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) { xi(static_cast<Eigen::Index>(j)) = train.at(i, j); }
        xi(static_cast<Eigen::Index>(n)) = 1.0;
        gram.noalias() += xi * xi.transpose();
        rhs += train.targets[i] * xi;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < static_cast<Eigen::Index>(p)) { throw NumericalError("fit_linear: design matrix is rank deficient"); }
    const Eigen::VectorXd beta = lu.solve(rhs);
    if (!beta.allFinite()) { throw NumericalError("fit_linear: non-finite solution"); }

    LinearModel model;
    model.coefficients.assign(beta.data(), beta.data() + n);
    model.intercept = beta(static_cast<Eigen::Index>(n));
    return model;
}

struct MetricReport {
    double rmse = 0.0;
    double mae = 0.0;
    double avg_overestimate = 0.0;
    double avg_underestimate = 0.0;
    std::optional<double> precision; // fraction of predictions inside [lower, upper]
};

/// Error metrics of `predictions` against the targets of `data` (residual = pred - y).
inline MetricReport metrics(std::span<const double> predictions, const Dataset& data)
{
    if (predictions.size() != data.n_rows) {
        throw std::invalid_argument("metrics: " + std::to_string(predictions.size()) + " predictions for "
            + std::to_string(data.n_rows) + " rows");
    }
    MetricReport m;
    double sq = 0.0;
    double ab = 0.0;
    double over = 0.0;
    double under = 0.0;
    std::size_t n_over = 0;
    std::size_t n_under = 0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const double r = predictions[i] - data.targets[i];
        sq += r * r;
        ab += std::fabs(r);
        if (r > 0) {
            over += r;
            ++n_over;
        } else if (r < 0) {
            under -= r;
            ++n_under;
        }
        if (data.has_bounds() && data.lower[i] <= predictions[i] && predictions[i] <= data.upper[i]) { ++inside; }
    }
    const auto n = static_cast<double>(data.n_rows);
    m.rmse = std::sqrt(sq / n);
    m.mae = ab / n;
    m.avg_overestimate = n_over ? over / static_cast<double>(n_over) : 0.0;
    m.avg_underestimate = n_under ? under / static_cast<double>(n_under) : 0.0;
    if (data.has_bounds()) { m.precision = static_cast<double>(inside) / n; }
    return m;
}

// Synthetic stand-ins for the two reference schemas, used for smoke runs and
// tests when the real data files are not available.

/// Six thermal-contributor features (LVAH, SH, DECL, TX, FO, NS) and power target P.
inline Dataset synthetic_thermal(std::size_t n_rows, std::uint64_t seed, double shift = 0.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 2.0);
    std::bernoulli_distribution flag(0.2);
    Dataset d;
    d.n_rows = n_rows;
    d.n_features = 6;
    d.feature_names = { "LVAH", "SH", "DECL", "TX", "FO", "NS" };
    d.target_name = "P";
    for (std::size_t i = 0; i < n_rows; ++i) {
        const double lvah = 0.5 * u01(rng) + shift * 0.1;
        const double sh = 200.0 + 100.0 * u01(rng) + shift * 20.0;
        const double decl = 2000.0 * u01(rng);
        const double tx = u01(rng);
        const double fo = flag(rng) ? 1.0 : 0.0;
        const double ns = flag(rng) ? 1.0 : 0.0;
        const double p = -76.66 * lvah - 0.1764 * sh - 3.387e-3 * decl - 6.898 * tx + 11.07 * fo + 6.820 * ns + 226.7
            + 4e-4 * (sh - 250.0) * (sh - 250.0) + noise(rng);
        d.features.insert(d.features.end(), { lvah, sh, decl, tx, fo, ns });
        d.targets.push_back(p);
    }
    d.check();
    return d;
}

/// Seven stellar features (M, R, Teff, L, FeH, logg, Prot), age target and confidence bounds.
inline Dataset synthetic_stellar(std::size_t n_rows, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.3);
    Dataset d;
    d.n_rows = n_rows;
    d.n_features = 7;
    d.feature_names = { "M", "R", "Teff", "L", "FeH", "logg", "Prot" };
    d.target_name = "age";
    d.lower_name = "age_lo";
    d.upper_name = "age_hi";
    for (std::size_t i = 0; i < n_rows; ++i) {
        const double mass = 0.7 + 0.6 * u01(rng);
        const double radius = 0.6 + 0.9 * u01(rng);
        const double teff = 4500.0 + 2000.0 * u01(rng);
        const double lum = radius * radius * std::pow(teff / 5772.0, 4.0);
        const double feh = -0.5 + u01(rng);
        const double logg = 4.44 + std::log10(mass / (radius * radius));
        const double prot = 2.0 + 40.0 * u01(rng);
        const double age = std::max(0.1, 0.25 * prot - std::sin(radius - feh) + 1.5 + noise(rng));
        const double err = 0.2 + 0.3 * u01(rng) * age;
        d.features.insert(d.features.end(), { mass, radius, teff, lum, feh, logg, prot });
        d.targets.push_back(age);
        d.lower.push_back(age - err);
        d.upper.push_back(age + err);
    }
    d.check();
    return d;
}

} // namespace dcgp
