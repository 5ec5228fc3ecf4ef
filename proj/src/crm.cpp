#include "docsynth/crm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace docsynth {
namespace crm {

double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

NormParams NormParams::identity(int channels) {
    NormParams p;
    p.mean.assign(channels, 0.0);
    p.var.assign(channels, 1.0 - kNormEps); // so the denominator is exactly 1
    p.gamma.assign(channels, 1.0);
    p.beta.assign(channels, 0.0);
    return p;
}

void CrmConfig::validate() const {
    if (k < 1 || k % 2 == 0) throw std::runtime_error("crm config: k must be odd");
    if (dilations.empty()) throw std::runtime_error("crm config: need at least one dilation");
    std::set<int> seen;
    for (int d : dilations) {
        if (d < 1) throw std::runtime_error("crm config: dilations must be positive");
        if (!seen.insert(d).second)
            throw std::runtime_error("crm config: dilations must be distinct");
    }
}

namespace {

void check_norm(const NormParams& p, size_t channels, const char* what) {
    if (p.mean.size() != channels || p.var.size() != channels || p.gamma.size() != channels ||
        p.beta.size() != channels)
        throw std::runtime_error(std::string("crm params: ") + what + " has wrong channel count");
    for (double v : p.var)
        if (v <= 0.0) throw std::runtime_error(std::string("crm params: ") + what + " var <= 0");
}

double apply_norm(const NormParams& p, int ch, double v) {
    return (v - p.mean[ch]) / std::sqrt(p.var[ch] + kNormEps) * p.gamma[ch] + p.beta[ch];
}

} // namespace

void CrmParams::validate(int channels, const CrmConfig& cfg) const {
    cfg.validate();
    const size_t c = static_cast<size_t>(channels);
    const size_t nc = c * cfg.dilations.size();
    if (shared_kernel.out_ch != channels || shared_kernel.in_ch != channels ||
        shared_kernel.k != cfg.k)
        throw std::runtime_error("crm params: shared kernel shape mismatch");
    if (shared_kernel.w.size() != c * c * cfg.k * cfg.k || shared_kernel.bias.size() != c)
        throw std::runtime_error("crm params: shared kernel buffer size mismatch");
    if (branch_norm.size() != cfg.dilations.size())
        throw std::runtime_error("crm params: one norm set per branch required");
    for (const auto& bn : branch_norm) check_norm(bn, c, "branch norm");
    if (gate_weights.size() != nc || gate_bias.size() != nc)
        throw std::runtime_error("crm params: gate conv must have one weight per channel");
    check_norm(gate_norm, nc, "gate norm");
    if (out_weights.out_ch != channels || out_weights.in_ch != static_cast<int>(nc) ||
        out_weights.k != 1 || out_weights.w.size() != c * nc || out_weights.bias.size() != c)
        throw std::runtime_error("crm params: output projection shape mismatch");
    check_norm(out_norm, c, "out norm");
}

Tensor3 dilated_conv(const Tensor3& x, const ConvWeights& weights, int dilation,
                     int padding_override) {
    if (weights.k % 2 == 0) throw std::runtime_error("dilated_conv: k must be odd");
    if (weights.in_ch != x.c) throw std::runtime_error("dilated_conv: channel mismatch");
    const int k = weights.k;
    const int pad = padding_override >= 0 ? padding_override : dilation * (k - 1) / 2;
    const int oh = x.h + 2 * pad - dilation * (k - 1);
    const int ow = x.w + 2 * pad - dilation * (k - 1);
    if (oh < 1 || ow < 1) throw std::runtime_error("dilated_conv: output would be empty");

    Tensor3 out(weights.out_ch, oh, ow);
    for (int oc = 0; oc < weights.out_ch; ++oc)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = weights.bias[oc];
                for (int ic = 0; ic < x.c; ++ic)
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy - pad + ky * dilation;
                        if (iy < 0 || iy >= x.h) continue; // zero padding
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox - pad + kx * dilation;
                            if (ix < 0 || ix >= x.w) continue;
                            acc += weights.at(oc, ic, ky, kx) * x.at(ic, iy, ix);
                        }
                    }
                out.at(oc, oy, ox) = acc;
            }
    return out;
}

Tensor3 branch_forward(const Tensor3& x, const CrmParams& params, const CrmConfig& cfg,
                       int branch) {
    params.validate(x.c, cfg);
    if (branch < 0 || branch >= static_cast<int>(cfg.dilations.size()))
        throw std::runtime_error("branch_forward: branch index out of range");
    const NormParams& norm =
        params.branch_norm[cfg.shared_branch_norm ? 0 : static_cast<size_t>(branch)];
    Tensor3 f = dilated_conv(x, params.shared_kernel, cfg.dilations[branch]);
    for (int ch = 0; ch < f.c; ++ch)
        for (int y = 0; y < f.h; ++y)
            for (int xx = 0; xx < f.w; ++xx)
                f.at(ch, y, xx) = gelu(apply_norm(norm, ch, f.at(ch, y, xx)));
    return f;
}

Tensor3 gate_mask(const Tensor3& f_hat, const CrmParams& params) {
    if (static_cast<size_t>(f_hat.c) != params.gate_weights.size())
        throw std::runtime_error("gate_mask: channel count mismatch");
    Tensor3 m(f_hat.c, f_hat.h, f_hat.w);
    for (int ch = 0; ch < f_hat.c; ++ch)
        for (int y = 0; y < f_hat.h; ++y)
            for (int x = 0; x < f_hat.w; ++x) {
                // grouped kernel-1 conv: each channel sees only itself
                double v = params.gate_weights[ch] * f_hat.at(ch, y, x) + params.gate_bias[ch];
                m.at(ch, y, x) = sigmoid(gelu(apply_norm(params.gate_norm, ch, v)));
            }
    return m;
}

Tensor3 crm_forward(const Tensor3& x, const CrmParams& params, const CrmConfig& cfg,
                    int padding_bias) {
    params.validate(x.c, cfg);
    const int n = static_cast<int>(cfg.dilations.size());

    Tensor3 f_hat(x.c * n, x.h, x.w);
    for (int b = 0; b < n; ++b) {
        const int d = cfg.dilations[b];
        const int pad = d * (cfg.k - 1) / 2 + padding_bias;
        Tensor3 f = dilated_conv(x, params.shared_kernel, d, pad);
        if (f.h != x.h || f.w != x.w)
            throw std::runtime_error("crm_forward: branch output lost spatial size");
        const NormParams& norm =
            params.branch_norm[cfg.shared_branch_norm ? 0 : static_cast<size_t>(b)];
        for (int ch = 0; ch < x.c; ++ch)
            for (int y = 0; y < x.h; ++y)
                for (int xx = 0; xx < x.w; ++xx)
                    f_hat.at(b * x.c + ch, y, xx) =
                        gelu(apply_norm(norm, ch, f.at(ch, y, xx)));
    }

    Tensor3 m = gate_mask(f_hat, params);

    Tensor3 out(x.c, x.h, x.w);
    for (int oc = 0; oc < x.c; ++oc)
        for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx) {
                double acc = params.out_weights.bias[oc];
                for (int ic = 0; ic < f_hat.c; ++ic)
                    acc += params.out_weights.w[static_cast<size_t>(oc) * f_hat.c + ic] *
                           (m.at(ic, y, xx) * f_hat.at(ic, y, xx));
                out.at(oc, y, xx) =
                    x.at(oc, y, xx) + gelu(apply_norm(params.out_norm, oc, acc));
            }
    return out;
}

Tensor3 random_tensor(int c, int h, int w, Rng& rng) {
    Tensor3 t(c, h, w);
    for (double& v : t.data) v = rng.uniform(-1.5, 1.5);
    return t;
}

CrmParams random_params(int channels, const CrmConfig& cfg, Rng& rng) {
    cfg.validate();
    const int n = static_cast<int>(cfg.dilations.size());
    const int nc = channels * n;
    auto rand_norm = [&](int ch) {
        NormParams p;
        for (int i = 0; i < ch; ++i) {
            p.mean.push_back(rng.uniform(-0.3, 0.3));
            p.var.push_back(rng.uniform(0.5, 1.5));
            p.gamma.push_back(rng.uniform(0.5, 1.5));
            p.beta.push_back(rng.uniform(-0.3, 0.3));
        }
        return p;
    };

    CrmParams params;
    params.shared_kernel.out_ch = channels;
    params.shared_kernel.in_ch = channels;
    params.shared_kernel.k = cfg.k;
    const double scale = 1.0 / (cfg.k * std::sqrt(static_cast<double>(channels)));
    for (int i = 0; i < channels * channels * cfg.k * cfg.k; ++i)
        params.shared_kernel.w.push_back(rng.uniform(-scale, scale));
    for (int i = 0; i < channels; ++i)
        params.shared_kernel.bias.push_back(rng.uniform(-0.1, 0.1));
    for (int b = 0; b < n; ++b) params.branch_norm.push_back(rand_norm(channels));
    for (int i = 0; i < nc; ++i) {
        params.gate_weights.push_back(rng.uniform(-1.0, 1.0));
        params.gate_bias.push_back(rng.uniform(-0.5, 0.5));
    }
    params.gate_norm = rand_norm(nc);
    params.out_weights.out_ch = channels;
    params.out_weights.in_ch = nc;
    params.out_weights.k = 1;
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(nc));
    for (int i = 0; i < channels * nc; ++i)
        params.out_weights.w.push_back(rng.uniform(-out_scale, out_scale));
    for (int i = 0; i < channels; ++i) params.out_weights.bias.push_back(rng.uniform(-0.1, 0.1));
    params.out_norm = rand_norm(channels);
    return params;
}

namespace {

json norm_to_json(const NormParams& p) {
    return json{{"mean", p.mean}, {"var", p.var}, {"gamma", p.gamma}, {"beta", p.beta}};
}

NormParams norm_from_json(const json& j) {
    NormParams p;
    p.mean = j.at("mean").get<std::vector<double>>();
    p.var = j.at("var").get<std::vector<double>>();
    p.gamma = j.at("gamma").get<std::vector<double>>();
    p.beta = j.at("beta").get<std::vector<double>>();
    return p;
}

json conv_to_json(const ConvWeights& w) {
    return json{{"out_ch", w.out_ch}, {"in_ch", w.in_ch}, {"k", w.k}, {"w", w.w},
                {"bias", w.bias}};
}

ConvWeights conv_from_json(const json& j) {
    ConvWeights w;
    w.out_ch = j.at("out_ch").get<int>();
    w.in_ch = j.at("in_ch").get<int>();
    w.k = j.at("k").get<int>();
    w.w = j.at("w").get<std::vector<double>>();
    w.bias = j.at("bias").get<std::vector<double>>();
    return w;
}

} // namespace

std::string params_to_json(const CrmParams& params) {
    json j;
    j["shared_kernel"] = conv_to_json(params.shared_kernel);
    j["branch_norm"] = json::array();
    for (const auto& bn : params.branch_norm) j["branch_norm"].push_back(norm_to_json(bn));
    j["gate_weights"] = params.gate_weights;
    j["gate_bias"] = params.gate_bias;
    j["gate_norm"] = norm_to_json(params.gate_norm);
    j["out_weights"] = conv_to_json(params.out_weights);
    j["out_norm"] = norm_to_json(params.out_norm);
    return j.dump(2) + "\n";
}

CrmParams params_from_json(const std::string& text) {
    json j = json::parse(text);
    CrmParams p;
    p.shared_kernel = conv_from_json(j.at("shared_kernel"));
    for (const auto& bn : j.at("branch_norm")) p.branch_norm.push_back(norm_from_json(bn));
    p.gate_weights = j.at("gate_weights").get<std::vector<double>>();
    p.gate_bias = j.at("gate_bias").get<std::vector<double>>();
    p.gate_norm = norm_from_json(j.at("gate_norm"));
    p.out_weights = conv_from_json(j.at("out_weights"));
    p.out_norm = norm_from_json(j.at("out_norm"));
    return p;
}

namespace {

// Monolithic straight-line transcription of the forward pass, kept separate
// from the composed implementation so self-check is a genuine cross-check.
Tensor3 naive_forward(const Tensor3& x, const CrmParams& p, const CrmConfig& cfg) {
    const int n = static_cast<int>(cfg.dilations.size());
    const int C = x.c, H = x.h, W = x.w, k = cfg.k;
    Tensor3 out(C, H, W);
    for (int oc = 0; oc < C; ++oc)
        for (int y = 0; y < H; ++y)
            for (int xx = 0; xx < W; ++xx) {
                double proj = p.out_weights.bias[oc];
                for (int b = 0; b < n; ++b) {
                    const int d = cfg.dilations[b];
                    const int pad = d * (k - 1) / 2;
                    const NormParams& bn = p.branch_norm[cfg.shared_branch_norm ? 0 : b];
                    for (int ch = 0; ch < C; ++ch) {
                        double conv = p.shared_kernel.bias[ch];
                        for (int ic = 0; ic < C; ++ic)
                            for (int ky = 0; ky < k; ++ky)
                                for (int kx = 0; kx < k; ++kx) {
                                    const int iy = y - pad + ky * d;
                                    const int ix = xx - pad + kx * d;
                                    if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                    conv += p.shared_kernel
                                                .w[((static_cast<size_t>(ch) * C + ic) * k + ky) *
                                                       k +
                                                   kx] *
                                            x.at(ic, iy, ix);
                                }
                        const double f = gelu((conv - bn.mean[ch]) /
                                                  std::sqrt(bn.var[ch] + kNormEps) *
                                                  bn.gamma[ch] +
                                              bn.beta[ch]);
                        const int gc = b * C + ch;
                        const double gv = p.gate_weights[gc] * f + p.gate_bias[gc];
                        const double gn = (gv - p.gate_norm.mean[gc]) /
                                              std::sqrt(p.gate_norm.var[gc] + kNormEps) *
                                              p.gate_norm.gamma[gc] +
                                          p.gate_norm.beta[gc];
                        const double m = sigmoid(gelu(gn));
                        proj += p.out_weights.w[static_cast<size_t>(oc) * (C * n) + gc] * (m * f);
                    }
                }
                const double on = (proj - p.out_norm.mean[oc]) /
                                      std::sqrt(p.out_norm.var[oc] + kNormEps) *
                                      p.out_norm.gamma[oc] +
                                  p.out_norm.beta[oc];
                out.at(oc, y, xx) = x.at(oc, y, xx) + gelu(on);
            }
    return out;
}

} // namespace

SelfCheckResult self_check(const CrmConfig& cfg, uint64_t seed, int padding_bias) {
    SelfCheckResult result;
    result.passed = true;
    char line[160];
    Rng rng(seed);

    auto record = [&](const char* name, double deviation, double tolerance) {
        const bool ok = deviation <= tolerance;
        std::snprintf(line, sizeof(line), "[%s] %-20s max deviation %.3e (tol %.1e)\n",
                      ok ? "ok" : "FAIL", name, deviation, tolerance);
        result.report += line;
        if (!ok) result.passed = false;
    };

    try {
        // shape preservation
        double shape_dev = 0.0;
        for (auto [c, h, w] : {std::tuple{4, 9, 11}, std::tuple{8, 16, 16}}) {
            CrmParams params = random_params(c, cfg, rng);
            Tensor3 x = random_tensor(c, h, w, rng);
            Tensor3 y = crm_forward(x, params, cfg, padding_bias);
            if (!y.same_shape(x)) shape_dev = 1.0;
        }
        record("shape", shape_dev, 0.0);

        // gate range strictly in (0,1)
        double gate_dev = 0.0;
        for (int t = 0; t < 10; ++t) {
            CrmParams params = random_params(4, cfg, rng);
            Tensor3 x = random_tensor(4, 8, 8, rng);
            Tensor3 f_hat(4 * static_cast<int>(cfg.dilations.size()), 8, 8);
            for (int b = 0; b < static_cast<int>(cfg.dilations.size()); ++b) {
                Tensor3 f = branch_forward(x, params, cfg, b);
                std::copy(f.data.begin(), f.data.end(),
                          f_hat.data.begin() + static_cast<size_t>(b) * f.data.size());
            }
            Tensor3 m = gate_mask(f_hat, params);
            for (double v : m.data)
                if (v <= 0.0 || v >= 1.0) gate_dev = 1.0;
        }
        record("gate_range", gate_dev, 0.0);

        // shortcut identity when the output projection is zeroed
        {
            CrmParams params = random_params(4, cfg, rng);
            std::fill(params.out_weights.w.begin(), params.out_weights.w.end(), 0.0);
            std::fill(params.out_weights.bias.begin(), params.out_weights.bias.end(), 0.0);
            params.out_norm = NormParams::identity(4);
            Tensor3 x = random_tensor(4, 10, 7, rng);
            Tensor3 y = crm_forward(x, params, cfg, padding_bias);
            double dev = 0.0;
            for (size_t i = 0; i < x.data.size(); ++i)
                dev = std::max(dev, std::abs(y.data[i] - x.data[i]));
            record("shortcut_identity", dev, 0.0);
        }

        // group locality of the gate
        {
            CrmParams params = random_params(3, cfg, rng);
            const int nc = 3 * static_cast<int>(cfg.dilations.size());
            Tensor3 f_hat = random_tensor(nc, 6, 6, rng);
            Tensor3 m0 = gate_mask(f_hat, params);
            double dev = 0.0;
            for (int j = 0; j < nc; ++j) {
                Tensor3 perturbed = f_hat;
                perturbed.at(j, 3, 3) += 1.0;
                Tensor3 m1 = gate_mask(perturbed, params);
                for (int ch = 0; ch < nc; ++ch) {
                    if (ch == j) continue;
                    for (int y = 0; y < 6; ++y)
                        for (int x = 0; x < 6; ++x)
                            dev = std::max(dev, std::abs(m1.at(ch, y, x) - m0.at(ch, y, x)));
                }
            }
            record("group_locality", dev, 0.0);
        }

        // oracle equivalence against the straight-line transcription
        {
            double dev = 0.0;
            for (int t = 0; t < 10; ++t) {
                const int c = 2 + t % 3;
                const int h = 5 + t % 4;
                const int w = 4 + t % 5;
                CrmParams params = random_params(c, cfg, rng);
                Tensor3 x = random_tensor(c, h, w, rng);
                Tensor3 got = crm_forward(x, params, cfg, padding_bias);
                Tensor3 want = naive_forward(x, params, cfg);
                for (size_t i = 0; i < x.data.size(); ++i) {
                    const double denom = std::max(1.0, std::abs(want.data[i]));
                    dev = std::max(dev, std::abs(got.data[i] - want.data[i]) / denom);
                }
            }
            record("oracle_equivalence", dev, 1e-10);
        }
    } catch (const std::exception& e) {
        result.report += std::string("[FAIL] exception: ") + e.what() + "\n";
        result.passed = false;
    }
    return result;
}

} // namespace crm
} // namespace docsynth
