// Acceptance gate: runs every release criterion end to end and prints one
// [PASS]/[FAIL] line per criterion.  Exit status is the number of failures.
// Full training runs are involved; expect tens of minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gradcheck.hpp"
#include "lmrl/errors.hpp"
#include "lmrl/fusion.hpp"
#include "lmrl/harness.hpp"
#include "lmrl/metrics.hpp"
#include "lmrl/model.hpp"
#include "lmrl/mpr.hpp"
#include "lmrl/ops.hpp"
#include "lmrl/rfl.hpp"
#include "lmrl/rng.hpp"
#include "lmrl/supervision.hpp"
#include "lmrl/synthgen.hpp"

using namespace lmrl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot read '" + p.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Tensor rnd(std::vector<int> shape, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    long n = 1;
    for (int d : shape) n *= d;
    std::vector<double> data(static_cast<size_t>(n));
    for (auto& v : data) v = rng.uniform(lo, hi);
    return Tensor::from(std::move(shape), std::move(data));
}

// Bounded away from zero so kinked ops (relu, abs) are smooth at the point.
Tensor rnd_offzero(std::vector<int> shape, uint64_t seed) {
    Rng rng(seed);
    long n = 1;
    for (int d : shape) n *= d;
    std::vector<double> data(static_cast<size_t>(n));
    for (auto& v : data) {
        const double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        v = sign * (0.2 + rng.uniform(0.0, 1.0));
    }
    return Tensor::from(std::move(shape), std::move(data));
}

// Square map whose pooling windows have no near-ties, so finite-difference
// steps cannot flip an argmax.
Tensor rnd_pool_guarded(int n, uint64_t seed, int window) {
    for (uint64_t attempt = 0;; ++attempt) {
        Tensor x = rnd({n, n}, seed + attempt * 7919, -50.0, 50.0);
        const int m = (n + window - 1) / window;
        bool ok = true;
        for (int bi = 0; bi < m && ok; ++bi)
            for (int bj = 0; bj < m && ok; ++bj) {
                std::vector<double> vals;
                for (int di = 0; di < window; ++di)
                    for (int dj = 0; dj < window; ++dj) {
                        const int i = bi * window + di, j = bj * window + dj;
                        if (i < n && j < n) vals.push_back(x.at(i, j));
                    }
                std::sort(vals.begin(), vals.end());
                for (size_t k = 1; k < vals.size(); ++k)
                    if (vals[k] - vals[k - 1] < 1e-2) ok = false;
            }
        if (ok) return x;
    }
}

Tensor wsum(const Tensor& t, uint64_t seed) {
    return sum_all(mul(t, rnd(t.shape(), seed ^ 0x5eed5eedULL, -2.0, 2.0)));
}

CycleAnnotations make_ann(std::vector<std::pair<int, int>> cycles) {
    CycleAnnotations ann;
    ann.cycles = std::move(cycles);
    ann.count = static_cast<int>(ann.cycles.size());
    return ann;
}

// ---------------------------------------------------------------------------
// criterion 1: finite differences over every op and branch

struct FdCase {
    std::string name;
    std::function<testutil::GradCheckResult(uint64_t)> run;
};

std::vector<FdCase> fd_cases() {
    std::vector<FdCase> cases;
    auto op = [&cases](const char* name,
                       std::function<testutil::GradCheckResult(uint64_t)> f) {
        cases.push_back({name, std::move(f)});
    };
    using testutil::gradcheck;

    op("matmul", [](uint64_t s) {
        auto a = rnd({4, 3}, s), b = rnd({3, 5}, s + 1);
        return gradcheck([&]() { return wsum(matmul(a, b), s); }, {a, b});
    });
    op("transpose", [](uint64_t s) {
        auto x = rnd({4, 6}, s);
        return gradcheck([&]() { return wsum(transpose(x), s); }, {x});
    });
    op("linear", [](uint64_t s) {
        auto x = rnd({3, 4}, s), w = rnd({4, 2}, s + 1), b = rnd({2}, s + 2);
        return gradcheck([&]() { return wsum(linear(x, w, b), s); }, {x, w, b});
    });
    op("conv1d", [](uint64_t s) {
        auto x = rnd({7, 2}, s), w = rnd({3, 2, 3}, s + 1), b = rnd({3}, s + 2);
        const int dil = 1 + static_cast<int>(s % 3);
        return gradcheck([&]() { return wsum(conv1d(x, w, b, dil), s); }, {x, w, b});
    });
    op("conv2d", [](uint64_t s) {
        auto x = rnd({5, 5, 2}, s), w = rnd({3, 3, 2, 2}, s + 1), b = rnd({2}, s + 2);
        const int dil = 1 + static_cast<int>(s % 2);
        return gradcheck([&]() { return wsum(conv2d(x, w, b, dil), s); }, {x, w, b});
    });
    op("max_pool2d", [](uint64_t s) {
        auto x = rnd_pool_guarded(6, s, 2);
        return gradcheck([&]() { return wsum(max_pool2d(x, 2, 2), s); }, {x});
    });
    op("self_attention", [](uint64_t s) {
        auto x = rnd({4, 4}, s);
        std::vector<Tensor> p;
        for (int i = 0; i < 4; ++i) {
            p.push_back(rnd({4, 4}, s + 1 + 2 * i));
            p.push_back(rnd({4}, s + 2 + 2 * i));
        }
        AttentionParams ap{p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]};
        std::vector<Tensor> inputs = {x};
        inputs.insert(inputs.end(), p.begin(), p.end());
        return gradcheck([&]() { return wsum(self_attention(x, 2, ap), s); }, inputs);
    });
    op("layer_norm", [](uint64_t s) {
        auto x = rnd({3, 5}, s), g = rnd({5}, s + 1), h = rnd({5}, s + 2);
        return gradcheck([&]() { return wsum(layer_norm(x, g, h, 1e-5), s); }, {x, g, h});
    });
    op("softmax_rows", [](uint64_t s) {
        auto x = rnd({4, 5}, s);
        return gradcheck([&]() { return wsum(softmax_rows(x), s); }, {x});
    });
    op("relu", [](uint64_t s) {
        auto x = rnd_offzero({4, 5}, s);
        return gradcheck([&]() { return wsum(relu(x), s); }, {x});
    });
    op("add", [](uint64_t s) {
        auto a = rnd({3, 4}, s), b = rnd({3, 4}, s + 1);
        return gradcheck([&]() { return wsum(add(a, b), s); }, {a, b});
    });
    op("sub", [](uint64_t s) {
        auto a = rnd({3, 4}, s), b = rnd({3, 4}, s + 1);
        return gradcheck([&]() { return wsum(sub(a, b), s); }, {a, b});
    });
    op("mul", [](uint64_t s) {
        auto a = rnd({3, 4}, s), b = rnd({3, 4}, s + 1);
        return gradcheck([&]() { return wsum(mul(a, b), s); }, {a, b});
    });
    op("mul_scalar", [](uint64_t s) {
        auto x = rnd({3, 4}, s), c = rnd({1}, s + 1);
        return gradcheck([&]() { return wsum(mul_scalar(x, c), s); }, {x, c});
    });
    op("add_rowvec", [](uint64_t s) {
        auto x = rnd({4, 3}, s), v = rnd({3}, s + 1);
        return gradcheck([&]() { return wsum(add_rowvec(x, v), s); }, {x, v});
    });
    op("scale", [](uint64_t s) {
        auto x = rnd({3, 4}, s);
        return gradcheck([&]() { return wsum(scale(x, 1.7), s); }, {x});
    });
    op("add_const", [](uint64_t s) {
        auto x = rnd({3, 4}, s);
        return gradcheck([&]() { return wsum(add_const(x, 0.3), s); }, {x});
    });
    op("neg", [](uint64_t s) {
        auto x = rnd({3, 4}, s);
        return gradcheck([&]() { return wsum(neg(x), s); }, {x});
    });
    op("square", [](uint64_t s) {
        auto x = rnd({3, 4}, s);
        return gradcheck([&]() { return wsum(square(x), s); }, {x});
    });
    op("abs_val", [](uint64_t s) {
        auto x = rnd_offzero({3, 4}, s);
        return gradcheck([&]() { return wsum(abs_val(x), s); }, {x});
    });
    op("log_clamped", [](uint64_t s) {
        auto x = rnd({3, 4}, s, 0.2, 2.0);
        return gradcheck([&]() { return wsum(log_clamped(x, 1e-12), s); }, {x});
    });
    op("sqrt_guarded", [](uint64_t s) {
        auto x = rnd({3, 4}, s, 0.2, 2.0);
        return gradcheck([&]() { return wsum(sqrt_guarded(x), s); }, {x});
    });
    op("sum_all", [](uint64_t s) {
        auto x = rnd({4, 5}, s);
        return gradcheck([&]() { return sum_all(x); }, {x});
    });
    op("mean_all", [](uint64_t s) {
        auto x = rnd({4, 5}, s);
        return gradcheck([&]() { return mean_all(x); }, {x});
    });
    op("sum_rows", [](uint64_t s) {
        auto x = rnd({4, 5}, s);
        return gradcheck([&]() { return wsum(sum_rows(x), s); }, {x});
    });
    op("concat_cols", [](uint64_t s) {
        auto a = rnd({3, 2}, s), b = rnd({3, 4}, s + 1);
        return gradcheck([&]() { return wsum(concat_cols({a, b}), s); }, {a, b});
    });
    op("slice_cols", [](uint64_t s) {
        auto x = rnd({3, 6}, s);
        return gradcheck([&]() { return wsum(slice_cols(x, 1, 4), s); }, {x});
    });
    op("slice_rows", [](uint64_t s) {
        auto x = rnd({7, 3}, s);
        return gradcheck([&]() { return wsum(slice_rows(x, 2, 5), s); }, {x});
    });
    op("gather_rows", [](uint64_t s) {
        auto x = rnd({5, 3}, s);
        return gradcheck([&]() { return wsum(gather_rows(x, {0, 3, 3, 1}), s); }, {x});
    });
    op("reshape", [](uint64_t s) {
        auto x = rnd({5, 6}, s);
        return gradcheck([&]() { return wsum(reshape(x, {3, 10}), s); }, {x});
    });
    op("interp_linear_rows", [](uint64_t s) {
        auto x = rnd({4, 1}, s);
        return gradcheck([&]() { return wsum(interp_linear_rows(x, 9), s); }, {x});
    });
    op("neg_sqdist_matrix", [](uint64_t s) {
        auto x = rnd({5, 3}, s);
        return gradcheck([&]() { return wsum(neg_sqdist_matrix(x), s); }, {x});
    });

    op("multi-scale similarity branch", [](uint64_t s) {
        MprConfig cfg;
        cfg.scales = 2;
        cfg.scale_orders = {1, 2};
        cfg.attention_heads = 2;
        cfg.out_channels = 4;
        ParamStore params(s);
        init_mpr_params(params, cfg, 4, 8);
        auto x = rnd({8, 4}, s + 9);
        auto make = [&]() { return wsum(mpr_forward(x, cfg, params).P, s + 10); };
        return gradcheck(make, {x, params.get("mpr.similarity.w"),
                                params.get("mpr.refine.expand.w"),
                                params.get("mpr.scale_k1.attn.wq"),
                                params.get("mpr.scale_k2.head.w")});
    });
    op("foreground localization branch", [](uint64_t s) {
        RflConfig cfg;
        cfg.n_blocks = 2;
        cfg.channels = 4;
        ParamStore params(s);
        init_rfl_params(params, cfg, 4);
        auto x = rnd({8, 4}, s + 11);
        auto make = [&]() {
            return wsum(foreground_logits(tcn_forward(x, cfg, params), params).probs, s + 12);
        };
        return gradcheck(make, {x, params.get("rfl.entry.w"),
                                params.get("rfl.block0.dilated.w"),
                                params.get("rfl.block1.pointwise.w"), params.get("rfl.head.w")});
    });
    op("fusion and density branch", [](uint64_t s) {
        FusionConfig cfg;
        cfg.fused_dim = 4;
        cfg.predictor_heads = 2;
        ParamStore params(s);
        init_fusion_params(params, cfg, 3, 3);
        auto a = rnd({8, 3}, s + 13), b = rnd({8, 3}, s + 14);
        auto make = [&]() { return predict_density(integrate(a, b, cfg, params), cfg, params).count; };
        return gradcheck(make, {a, b, params.get("fusion.proj_mpr.w"),
                                params.get("fusion.sigma1"),
                                params.get("predictor.layer0.attn.wq"),
                                params.get("predictor.head.w")});
    });
    op("counting loss", [](uint64_t s) {
        auto gt = density_gt(make_ann({{0, 4}, {4, 8}}), 8);
        // Mass lands in (2.4, 4.8), clear of the |c - c_gt| kink at c_gt = 2.
        auto pv = rnd({8, 1}, s, 0.3, 0.6);
        auto make = [&]() {
            DensityMap pred;
            pred.values = pv;
            pred.count = sum_all(pv);
            return loss_count(pred, gt, 0.8);
        };
        return gradcheck(make, {pv});
    });
    op("localization loss", [](uint64_t s) {
        auto probs = rnd({8, 2}, s, 0.2, 0.8);
        Rng rng(s + 1);
        std::vector<int> mask(8);
        for (auto& m : mask) m = rng.uniform_int(0, 1);
        return gradcheck([&]() { return loss_loc(probs, mask); }, {probs});
    });
    op("triplet loss", [](uint64_t s) {
        const std::vector<Triplet> triplets = {{0, 1, 4}, {2, 3, 5}, {6, 7, 0}, {1, 2, 6}};
        const double margin = 0.4;
        Tensor emb;
        for (uint64_t attempt = 0; attempt < 64; ++attempt) {
            emb = rnd({8, 3}, s + attempt * 104729, -1.0, 1.0);
            bool away_from_kink = true;
            for (const auto& t : triplets) {
                double dap = 0.0, dan = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const double dp = emb.at(t.anchor, k) - emb.at(t.positive, k);
                    const double dn = emb.at(t.anchor, k) - emb.at(t.negative, k);
                    dap += dp * dp;
                    dan += dn * dn;
                }
                if (std::abs(std::sqrt(dap) - std::sqrt(dan) + margin) < 1e-2)
                    away_from_kink = false;
            }
            if (away_from_kink) break;
        }
        return gradcheck([&]() { return loss_triplet(emb, triplets, margin); }, {emb});
    });
    return cases;
}

bool criterion1(std::string& detail) {
    const auto t0 = Clock::now();
    const auto cases = fd_cases();
    double worst = 0.0;
    std::string where = "none";
    for (const auto& c : cases) {
        for (int i = 0; i < 20; ++i) {
            const auto r = c.run(Rng::derive(4242, c.name, i));
            if (r.max_rel_err > worst) {
                worst = r.max_rel_err;
                where = c.name + " (" + r.worst + ")";
            }
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << cases.size() << " ops and branches x 20 instances, max rel err " << worst << " at "
       << where << ", " << secs << " s";
    detail = os.str();
    return worst < 1e-6 && secs < 60.0;
}

// ---------------------------------------------------------------------------
// criterion 2: shape and structure invariants

bool criterion2(std::string& detail) {
    for (int n : {16, 33, 64}) {
        MprConfig mcfg;  // 3 scales, orders 1..3
        ParamStore params(1000 + n);
        init_mpr_params(params, mcfg, 4, n);
        Tensor x = rnd({n, 4}, 2000 + n);
        const SimilarityStack stack = mpr_forward(x, mcfg, params);
        if (stack.P.rows() != n || stack.P.cols() != 3) {
            detail = "P shape wrong at N=" + std::to_string(n) + ": " + stack.P.shape_str();
            return false;
        }
        for (size_t i = 0; i < mcfg.scale_orders.size(); ++i) {
            const int k = mcfg.scale_orders[i];
            const int expect = (n + 2 * k - 1) / (2 * k);
            if (stack.pooled[i].rows() != expect || stack.pooled[i].cols() != expect) {
                detail = "pooled size wrong at N=" + std::to_string(n) +
                         " k=" + std::to_string(k) + ": " + stack.pooled[i].shape_str() +
                         " want " + std::to_string(expect);
                return false;
            }
        }

        RflConfig rcfg;
        rcfg.n_blocks = 4;
        rcfg.channels = 8;
        ParamStore rp(3000 + n);
        init_rfl_params(rp, rcfg, 4);
        const Tensor feats = tcn_forward(x, rcfg, rp);
        if (feats.rows() != n || feats.cols() != rcfg.channels) {
            detail = "TCN output shape wrong at N=" + std::to_string(n) + ": " +
                     feats.shape_str();
            return false;
        }

        for (auto mode : {FusionMode::rfl_only, FusionMode::mpr_only, FusionMode::weighted_avg,
                          FusionMode::concat}) {
            FusionConfig fcfg;
            fcfg.mode = mode;
            fcfg.fused_dim = 8;
            fcfg.predictor_heads = 2;
            ParamStore fp(4000 + n + 10 * static_cast<int>(mode));
            init_fusion_params(fp, fcfg, 3, rcfg.channels);
            const Tensor fused = integrate(rnd({n, 3}, 5000 + n), feats, fcfg, fp);
            if (fused.rows() != n || fused.cols() != fcfg.fused_dim) {
                detail = "fusion mode " + to_string(mode) + " shape wrong at N=" +
                         std::to_string(n) + ": " + fused.shape_str();
                return false;
            }
        }
    }
    detail = "P is NxK with pooled ceil(N/2k), TCN length-preserving, all fusion modes NxC' "
             "for N in {16, 33, 64}";
    return true;
}

// ---------------------------------------------------------------------------
// criterion 3: loss identities

CycleAnnotations random_ann(Rng& rng, int n) {
    CycleAnnotations ann;
    int t = 0;
    while (true) {
        const int s = t + rng.uniform_int(0, 3);
        const int d = rng.uniform_int(1, 12);
        if (s + d > n) break;
        ann.cycles.emplace_back(s, s + d);
        t = s + d;
        if (static_cast<int>(ann.cycles.size()) == 8) break;
    }
    ann.count = static_cast<int>(ann.cycles.size());
    return ann;
}

bool criterion3(std::string& detail) {
    for (auto cycles : {std::vector<std::pair<int, int>>{{1, 7}},
                        std::vector<std::pair<int, int>>{{0, 5}, {8, 16}},
                        std::vector<std::pair<int, int>>{{2, 4}, {5, 9}, {10, 15}}}) {
        const auto gt = density_gt(make_ann(cycles), 16);
        if (loss_count(gt, gt, 1.0).scalar_value() != 0.0) {
            detail = "loss_count(gt, gt) != 0";
            return false;
        }
    }

    const int n = 8;
    Tensor perfect = Tensor::zeros({n, 2});
    for (int t = 0; t < n; ++t) perfect.data()[t * 2 + 1] = 1.0;
    if (loss_loc(perfect, std::vector<int>(n, 1)).scalar_value() != 0.0) {
        detail = "loss_loc(perfect) != 0";
        return false;
    }
    Tensor uniform = Tensor::zeros({n, 2});
    std::fill(uniform.data().begin(), uniform.data().end(), 0.5);
    const std::vector<int> mixed = {0, 1, 1, 0, 1, 0, 0, 1};
    if (std::abs(loss_loc(uniform, mixed).scalar_value() - std::log(2.0)) > 1e-9) {
        detail = "loss_loc(uniform) != ln 2";
        return false;
    }

    Tensor sat = Tensor::from({3, 2}, {0.0, 0.0, 0.0, 0.0, 10.0, 0.0});
    if (loss_triplet(sat, {{0, 1, 2}}, 0.5).scalar_value() != 0.0) {
        detail = "satisfied triplet loss != 0";
        return false;
    }
    Tensor flat = Tensor::from({3, 2}, {1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
    if (std::abs(loss_triplet(flat, {{0, 1, 2}}, 0.5).scalar_value() - 0.5) > 1e-12) {
        detail = "degenerate triplet loss != margin";
        return false;
    }

    Rng seeds(600);
    double worst_mass_err = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Rng rng(seeds.uniform_int(0, 1 << 30));
        const auto ann = random_ann(rng, 100);
        const auto d = density_gt(ann, 100);
        double mass = 0.0;
        for (const double v : d.values.data()) mass += v;
        worst_mass_err = std::max(worst_mass_err, std::abs(mass - ann.count));
    }
    if (worst_mass_err > 1e-9) {
        detail = "density mass off by " + std::to_string(worst_mass_err);
        return false;
    }
    std::ostringstream os;
    os << "count/localization/triplet identities exact, density mass err " << worst_mass_err
       << " over 1000 annotation sets";
    detail = os.str();
    return true;
}

// ---------------------------------------------------------------------------
// criterion 4: metric oracles

std::vector<int> random_mask(Rng& rng, int n) {
    std::vector<int> mask;
    int label = rng.uniform_int(0, 1);
    while (static_cast<int>(mask.size()) < n) {
        const int run = rng.uniform_int(1, 6);
        for (int i = 0; i < run && static_cast<int>(mask.size()) < n; ++i) mask.push_back(label);
        label = 1 - label;
    }
    return mask;
}

int edit_distance_full(const std::vector<int>& a, const std::vector<int>& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
    for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i)
        for (size_t j = 1; j <= m; ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return d[n][m];
}

std::vector<int> compress_runs(const std::vector<int>& mask) {
    std::vector<int> out(mask);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::pair<int, int>> segments_of(const std::vector<int>& mask) {
    std::vector<std::pair<int, int>> segs;
    const int n = static_cast<int>(mask.size());
    for (int t = 0; t < n; ++t) {
        if (mask[t] && (t == 0 || !mask[t - 1])) segs.emplace_back(t, t);
        if (mask[t]) segs.back().second = t + 1;
    }
    return segs;
}

double frame_iou(std::pair<int, int> a, std::pair<int, int> b, int n) {
    int inter = 0, uni = 0;
    for (int t = 0; t < n; ++t) {
        const bool ia = t >= a.first && t < a.second;
        const bool ib = t >= b.first && t < b.second;
        if (ia && ib) ++inter;
        if (ia || ib) ++uni;
    }
    return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

double f1_oracle(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask,
                 double tau_percent) {
    const int n = static_cast<int>(gt_mask.size());
    const auto pred = segments_of(pred_mask);
    const auto gt = segments_of(gt_mask);
    if (pred.empty() && gt.empty()) return 100.0;
    if (pred.empty() || gt.empty()) return 0.0;
    std::vector<bool> used(pred.size(), false);
    int tp = 0;
    for (const auto& g : gt) {
        int best = -1;
        double best_iou = 0.0;
        for (size_t i = 0; i < pred.size(); ++i) {
            if (used[i]) continue;
            const double v = frame_iou(g, pred[i], n);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0 && best_iou >= tau_percent / 100.0) {
            used[best] = true;
            ++tp;
        }
    }
    const double precision = static_cast<double>(tp) / pred.size();
    const double recall = static_cast<double>(tp) / gt.size();
    if (precision + recall == 0.0) return 0.0;
    return 100.0 * 2.0 * precision * recall / (precision + recall);
}

bool criterion4(std::string& detail) {
    Rng rng(700);

    std::vector<std::pair<double, double>> pairs;
    double ref_mae = 0.0, ref_hits = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double gt = static_cast<double>(rng.uniform_int(1, 12));
        const double pred = rng.uniform(-2.0, 15.0);
        pairs.emplace_back(gt, pred);
        const double p = std::max(pred, 0.0);
        ref_mae += std::fabs(p - gt) / gt;
        if (std::fabs(p - gt) <= 1.0) ref_hits += 1.0;
    }
    const auto [mae, obo] = mae_obo(pairs);
    if (std::abs(mae - ref_mae / 200.0) > 1e-9 || obo != ref_hits / 200.0) {
        detail = "MAE/OBO disagrees with the direct formula";
        return false;
    }

    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(2, 32);
        const auto p = random_mask(rng, n);
        const auto g = random_mask(rng, n);

        int match = 0;
        for (int t = 0; t < n; ++t)
            if (p[t] == g[t]) ++match;
        worst = std::max(worst, std::abs(frame_accuracy(p, g) - 100.0 * match / n));

        const auto lp = compress_runs(p);
        const auto lg = compress_runs(g);
        const double ref_edit =
            100.0 * (1.0 - edit_distance_full(lp, lg) /
                               static_cast<double>(std::max(lp.size(), lg.size())));
        worst = std::max(worst, std::abs(edit_score(p, g) - ref_edit));

        for (const double tau : {10.0, 25.0, 50.0})
            worst = std::max(worst, std::abs(f1_at(p, g, tau) - f1_oracle(p, g, tau)));
    }
    std::ostringstream os;
    os << "MAE/OBO exact on 200 pairs; frame/edit/F1 worst oracle gap " << worst
       << " over 200 mask pairs";
    detail = os.str();
    return worst <= 1e-9;
}

// ---------------------------------------------------------------------------
// criteria 5-7: end-to-end runs

struct MainRun {
    RunConfig cfg;
    TrainResult tr;
    EvalReport rep;
    bool ready = false;
};

bool criterion5(const fs::path& root, MainRun& run, std::string& detail) {
    RunConfig cfg;
    cfg.data_dir = (root / "data").string();
    cfg.out_dir = (root / "run_full").string();
    cfg.seed = 7;

    const auto t0 = Clock::now();
    cmd_generate(cfg);
    const double gen_secs = seconds_since(t0);
    const TrainResult tr = cmd_train(cfg);
    const double train_secs = seconds_since(t0) - gen_secs;
    const EvalReport rep = cmd_eval(cfg, tr.best_checkpoint, "test");
    const double total_secs = seconds_since(t0);

    run.cfg = cfg;
    run.tr = tr;
    run.rep = rep;
    run.ready = true;

    const Manifest m = read_manifest((fs::path(cfg.data_dir) / "manifest.json").string());
    const auto test_seqs = load_split(cfg.data_dir, m, "test");
    std::map<std::string, double> pred_by_id;
    for (const auto& pv : rep.per_video) pred_by_id[pv.id] = pv.pred_count;

    std::vector<std::pair<double, double>> model_pairs, base_pairs;
    for (const auto& s : test_seqs) {
        bool has_gap = false;
        for (size_t i = 0; i + 1 < s.annotations.cycles.size(); ++i)
            if (s.annotations.cycles[i + 1].first > s.annotations.cycles[i].second)
                has_gap = true;
        if (!has_gap) continue;
        const double gt = static_cast<double>(s.annotations.count);
        model_pairs.emplace_back(gt, pred_by_id.at(s.id));
        base_pairs.emplace_back(gt, autocorr_count(s.embeddings));
    }
    if (model_pairs.empty()) {
        detail = "no interruption-containing sequences in the test split";
        return false;
    }
    const auto [mae_m, obo_m] = mae_obo(model_pairs);
    const auto [mae_b, obo_b] = mae_obo(base_pairs);

    std::ostringstream os;
    os.precision(4);
    os << "MAE " << rep.mae << " (<= 0.35), OBO " << rep.obo << " (>= 0.5); interrupted subset n="
       << model_pairs.size() << ": model MAE/OBO " << mae_m << "/" << obo_m
       << " vs autocorr " << mae_b << "/" << obo_b << "; train " << static_cast<int>(train_secs)
       << " s, total " << static_cast<int>(total_secs) << " s (<= 1800)";
    detail = os.str();

    bool ma_ok = true;
    const auto& losses = tr.epoch_train_loss;
    if (losses.size() >= 20) {
        auto ma = [&losses](int e) {
            double acc = 0.0;
            for (int i = e - 4; i <= e; ++i) acc += losses[static_cast<size_t>(i)];
            return acc / 5.0;
        };
        for (int e = 4; e + 1 < 20; ++e)
            if (ma(e + 1) > ma(e) + 1e-9) ma_ok = false;
    }
    std::printf("[info] smoothed train loss non-increasing over first 20 epochs: %s\n",
                ma_ok ? "yes" : "no");

    return rep.obo >= 0.5 && rep.mae <= 0.35 && mae_m < mae_b && obo_m > obo_b &&
           total_secs <= 1800.0;
}

bool criterion6(const fs::path& root, const MainRun& run, std::string& detail) {
    if (!run.ready) {
        detail = "main training run unavailable";
        return false;
    }
    RunConfig noloc = run.cfg;
    noloc.loss.l_loc = false;
    noloc.out_dir = (root / "run_noloc").string();
    const TrainResult tr_noloc = cmd_train(noloc);
    const EvalReport rep_noloc = cmd_eval(noloc, tr_noloc.best_checkpoint, "test");

    RunConfig rfl_only = run.cfg;
    rfl_only.fusion.mode = FusionMode::rfl_only;
    rfl_only.out_dir = (root / "run_rfl_only").string();
    const TrainResult tr_rfl = cmd_train(rfl_only);
    const EvalReport rep_rfl = cmd_eval(rfl_only, tr_rfl.best_checkpoint, "test");

    RunConfig mpr_only = run.cfg;
    mpr_only.fusion.mode = FusionMode::mpr_only;
    mpr_only.out_dir = (root / "run_mpr_only").string();
    const TrainResult tr_mpr = cmd_train(mpr_only);
    const EvalReport rep_mpr = cmd_eval(mpr_only, tr_mpr.best_checkpoint, "test");

    std::ostringstream os;
    os.precision(4);
    os << "frame acc with/without localization loss " << run.rep.frame_acc << "/"
       << rep_noloc.frame_acc << "; OBO weighted_avg/rfl_only/mpr_only " << run.rep.obo << "/"
       << rep_rfl.obo << "/" << rep_mpr.obo;
    detail = os.str();
    return run.rep.frame_acc > rep_noloc.frame_acc && run.rep.obo >= rep_rfl.obo &&
           run.rep.obo >= rep_mpr.obo;
}

bool criterion7(const fs::path& root, std::string& detail) {
    RunConfig cfg;
    cfg.data_dir = (root / "data_small").string();
    cfg.out_dir = (root / "run7a").string();
    cfg.seed = 20270101;
    cfg.splits = {40, 10, 10};
    cfg.optim.epochs = 5;
    cmd_generate(cfg);
    const TrainResult a = cmd_train(cfg);

    RunConfig cfg_b = cfg;
    cfg_b.out_dir = (root / "run7b").string();
    const TrainResult b = cmd_train(cfg_b);

    const bool log_same = slurp(a.log_path) == slurp(b.log_path);
    const bool ckpt_same = slurp(a.best_checkpoint) == slurp(b.best_checkpoint);

    const Checkpoint ck = load_checkpoint(a.best_checkpoint);
    const std::string resaved = (root / "resaved.ckpt").string();
    save_checkpoint(resaved, ck);
    const bool resave_same = slurp(resaved) == slurp(a.best_checkpoint);

    cmd_eval(cfg, a.best_checkpoint, "test");
    const std::string r1 = slurp(fs::path(cfg.out_dir) / "report.json");
    cmd_eval(cfg, a.best_checkpoint, "test");
    const std::string r2 = slurp(fs::path(cfg.out_dir) / "report.json");
    RunConfig cfg_c = cfg;
    cfg_c.out_dir = (root / "run7c").string();
    cmd_eval(cfg_c, resaved, "test");
    const std::string r3 = slurp(fs::path(cfg_c.out_dir) / "report.json");

    std::ostringstream os;
    os << "repeated training logs " << (log_same ? "identical" : "DIFFER") << ", checkpoints "
       << (ckpt_same ? "identical" : "DIFFER") << ", checkpoint resave "
       << (resave_same ? "identical" : "DIFFER") << ", reports "
       << (r1 == r2 && r1 == r3 ? "identical" : "DIFFER");
    detail = os.str();
    return log_same && ckpt_same && resave_same && r1 == r2 && r1 == r3;
}

int g_failures = 0;

void run_criterion(int id, const char* what, const std::function<bool(std::string&)>& f) {
    std::string detail;
    bool pass = false;
    try {
        pass = f(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, what,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    const fs::path root = fs::absolute("acceptance_out");
    fs::remove_all(root);
    fs::create_directories(root);
    std::printf("acceptance artifacts under %s\n", root.c_str());
    std::fflush(stdout);

    MainRun run;
    run_criterion(1, "finite-difference gradients for every op and branch", criterion1);
    run_criterion(2, "shape and pooling-structure invariants", criterion2);
    run_criterion(3, "loss identities and density mass", criterion3);
    run_criterion(4, "metrics match brute-force oracles", criterion4);
    run_criterion(5, "synthetic end-to-end counting target",
                  [&](std::string& d) { return criterion5(root, run, d); });
    run_criterion(6, "localization loss and fusion ablation directions",
                  [&](std::string& d) { return criterion6(root, run, d); });
    run_criterion(7, "bytewise determinism and checkpoint round-trip",
                  [&](std::string& d) { return criterion7(root, d); });

    std::printf("%d of 7 criteria passed in %.0f s\n", 7 - g_failures, seconds_since(t0));
    return g_failures;
}
