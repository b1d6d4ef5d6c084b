#include "ssfgnet/diagnostics.hpp"

#include <cmath>
#include <string>

#include "ssfgnet/error.hpp"

namespace ssfgnet::diagnostics {

namespace {

void require_positive_degrees(const graph::Graph& g, const char* op) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        if (g.degrees()[i] == 0) {
            throw DegenerateError(std::string(op) + ": node " + std::to_string(i) + " has zero degree");
        }
    }
}

} // namespace

std::vector<double> stationary_pi(const graph::Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n == 0) throw DegenerateError("stationary_pi: empty graph");
    require_positive_degrees(g, "stationary_pi");
    const auto comp = graph::connected_components(g);
    std::size_t count = 0;
    for (auto c : comp) count = std::max(count, c + 1);
    if (count > 1) {
        std::string msg = "stationary_pi: graph has " + std::to_string(count) + " components; node->component:";
        for (std::size_t i = 0; i < n && i < 32; ++i) msg += " " + std::to_string(i) + ":" + std::to_string(comp[i]);
        if (n > 32) msg += " ...";
        throw DegenerateError(msg);
    }
    std::vector<double> pi(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        pi[i] = std::sqrt(static_cast<double>(g.degrees()[i]));
        total += pi[i];
    }
    for (auto& v : pi) v /= total;
    return pi;
}

Tensor power_smooth(const graph::Graph& g, const Tensor& x, std::size_t k) {
    const std::size_t n = g.num_nodes();
    if (x.rank() != 2 || x.shape()[0] != n) {
        throw DimensionError("power_smooth: features " + shape_str(x.shape()) + " for " + std::to_string(n) + " nodes");
    }
    if (k == 0) return x;
    require_positive_degrees(g, "power_smooth");
    const std::size_t c = x.shape()[1];
    std::vector<double> w(g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edges()[e];
        w[e] = 1.0 / std::sqrt(static_cast<double>(g.degrees()[ed.dst]) * static_cast<double>(g.degrees()[ed.src]));
    }
    Tensor cur = x;
    Tensor next({n, c});
    for (std::size_t step = 0; step < k; ++step) {
        next.fill(0.0);
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            const auto& ed = g.edges()[e];
            const double* src = &cur[ed.src * c];
            double* dst = &next[ed.dst * c];
            for (std::size_t j = 0; j < c; ++j) dst[j] += w[e] * src[j];
        }
        std::swap(cur, next);
    }
    return cur;
}

double mean_pairwise_sq_distance(const Tensor& h) {
    const std::size_t n = h.rows(), d = h.cols();
    if (n < 2) throw DegenerateError("mean_pairwise_distance: needs at least 2 rows, got " + std::to_string(n));
    // sum_{i<j} |h_i - h_j|^2 = n * sum_c sum_i (h_ic - mean_c)^2
    double total = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += h[i * d + c];
        mu /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = h[i * d + c] - mu;
            ss += z * z;
        }
        total += ss;
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return static_cast<double>(n) * total / pairs;
}

double mean_pairwise_sq_distance_exact(const Tensor& h) {
    const std::size_t n = h.rows(), d = h.cols();
    if (n < 2) throw DegenerateError("mean_pairwise_distance: needs at least 2 rows, got " + std::to_string(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double z = h[i * d + c] - h[j * d + c];
                s += z * z;
            }
            total += s;
        }
    }
    return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double mean_pairwise_distance(const Tensor& h) {
    const std::size_t n = h.rows(), d = h.cols();
    if (n < 2) throw DegenerateError("mean_pairwise_distance: needs at least 2 rows, got " + std::to_string(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double z = h[i * d + c] - h[j * d + c];
                s += z * z;
            }
            total += std::sqrt(s);
        }
    }
    return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

MadResult mad_detail(const Tensor& h, const graph::Graph& g) {
    const std::size_t n = h.rows(), d = h.cols();
    if (n != g.num_nodes()) {
        throw DimensionError("mad: features " + shape_str(h.shape()) + " for " + std::to_string(g.num_nodes()) +
                             " nodes");
    }
    std::vector<double> norm(n);
    MadResult r;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += h[i * d + c] * h[i * d + c];
        norm[i] = std::sqrt(s);
        if (norm[i] < 1e-12) ++r.skipped_rows;
    }
    if (r.skipped_rows == n) throw DegenerateError("mad: every feature row is zero");
    double total = 0.0;
    for (const auto& e : g.edges()) {
        if (e.src == e.dst || norm[e.src] < 1e-12 || norm[e.dst] < 1e-12) continue;
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += h[e.src * d + c] * h[e.dst * d + c];
        total += 1.0 - dot / (norm[e.src] * norm[e.dst]);
        ++r.pairs;
    }
    r.value = r.pairs ? total / static_cast<double>(r.pairs) : 0.0;
    return r;
}

double mad(const Tensor& h, const graph::Graph& g) { return mad_detail(h, g).value; }

double distance_to_stationary(const Tensor& h, const graph::Graph& g) {
    const std::size_t n = h.rows(), d = h.cols();
    if (n != g.num_nodes()) {
        throw DimensionError("distance_to_stationary: features " + shape_str(h.shape()) + " for " +
                             std::to_string(g.num_nodes()) + " nodes");
    }
    require_positive_degrees(g, "distance_to_stationary");
    std::vector<double> v(n);
    double vn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::sqrt(static_cast<double>(g.degrees()[i]));
        vn += v[i] * v[i];
    }
    vn = std::sqrt(vn);
    for (auto& x : v) x /= vn;
    double resid = 0.0, total = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += v[i] * h[i * d + c];
        for (std::size_t i = 0; i < n; ++i) {
            const double z = h[i * d + c] - proj * v[i];
            resid += z * z;
            total += h[i * d + c] * h[i * d + c];
        }
    }
    return total > 0.0 ? std::sqrt(resid / total) : 0.0;
}

SmoothnessReport smoothness_report(const graph::Graph& g, const std::vector<Tensor>& layer_outputs) {
    SmoothnessReport report;
    for (std::size_t l = 0; l < layer_outputs.size(); ++l) {
        const Tensor& h = layer_outputs[l];
        SmoothnessEntry e;
        e.layer = l;
        e.mean_pairwise_distance = h.rows() >= 2 ? mean_pairwise_distance(h) : 0.0;
        const auto m = [&] {
            try {
                return mad_detail(h, g);
            } catch (const DegenerateError&) {
                return MadResult{};
            }
        }();
        e.mad = m.value;
        e.distance_to_stationary = distance_to_stationary(h, g);
        report.push_back(e);
    }
    return report;
}

} // namespace ssfgnet::diagnostics
