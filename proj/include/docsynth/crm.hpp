#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docsynth/rng.hpp"

namespace docsynth {
namespace crm {

/// Dense CHW tensor of doubles.
struct Tensor3 {
    int c = 0, h = 0, w = 0;
    std::vector<double> data; // index = (ch * h + y) * w + x

    Tensor3() = default;
    Tensor3(int c_, int h_, int w_, double fill = 0.0)
        : c(c_), h(h_), w(w_), data(static_cast<size_t>(c_) * h_ * w_, fill) {}

    double& at(int ch, int y, int x) {
        return data[(static_cast<size_t>(ch) * h + y) * w + x];
    }
    double at(int ch, int y, int x) const {
        return data[(static_cast<size_t>(ch) * h + y) * w + x];
    }
    bool same_shape(const Tensor3& o) const { return c == o.c && h == o.h && w == o.w; }
};

/// Conv weights, out_ch x in_ch x k x k, plus per-output-channel bias.
struct ConvWeights {
    int out_ch = 0, in_ch = 0, k = 1;
    std::vector<double> w; // index = ((oc * in_ch + ic) * k + ky) * k + kx
    std::vector<double> bias;

    double at(int oc, int ic, int ky, int kx) const {
        return w[((static_cast<size_t>(oc) * in_ch + ic) * k + ky) * k + kx];
    }
};

/// Inference-mode normalization statistics, one entry per channel.
struct NormParams {
    std::vector<double> mean, var, gamma, beta;
    static NormParams identity(int channels);
};

struct CrmConfig {
    int k = 3;
    std::vector<int> dilations = {1, 2, 3};
    bool shared_branch_norm = false; // use branch 0's stats for every branch

    static CrmConfig global_preset() { return {5, {1, 2, 3}, false}; }
    static CrmConfig block_preset() { return {3, {1, 2, 3}, false}; }
    void validate() const; // k odd, dilations positive and distinct
};

struct CrmParams {
    ConvWeights shared_kernel;             // C x C x k x k, shared across branches
    std::vector<NormParams> branch_norm;   // one per dilation branch, C channels each
    std::vector<double> gate_weights;      // kernel-1 conv, groups = nC: one scalar per channel
    std::vector<double> gate_bias;
    NormParams gate_norm;                  // nC channels
    ConvWeights out_weights;               // C x nC x 1 x 1
    NormParams out_norm;                   // C channels

    void validate(int channels, const CrmConfig& cfg) const;
};

constexpr double kNormEps = 1e-5;

double gelu(double x); // exact erf form
double sigmoid(double x);

/// Same-spatial-size dilated conv, zero padding d*(k-1)/2, cross-correlation
/// semantics. The padding override exists for fault-injection tests.
Tensor3 dilated_conv(const Tensor3& x, const ConvWeights& weights, int dilation,
                     int padding_override = -1);

/// F_i: conv with the shared kernel at one dilation, then normalization and GELU.
Tensor3 branch_forward(const Tensor3& x, const CrmParams& params, const CrmConfig& cfg,
                       int branch);

/// Gate mask over the concatenated branches: channel-grouped kernel-1 conv,
/// normalization, GELU, sigmoid. Every output value lies strictly in (0,1).
Tensor3 gate_mask(const Tensor3& f_hat, const CrmParams& params);

/// Full forward pass with residual shortcut; output shape equals input shape.
/// padding_bias shifts every branch's padding and exists only for
/// fault-injection tests.
Tensor3 crm_forward(const Tensor3& x, const CrmParams& params, const CrmConfig& cfg,
                    int padding_bias = 0);

CrmParams random_params(int channels, const CrmConfig& cfg, Rng& rng);
Tensor3 random_tensor(int c, int h, int w, Rng& rng);

// JSON tensor file round-trip for reproducible self-checks
std::string params_to_json(const CrmParams& params);
CrmParams params_from_json(const std::string& text);

struct SelfCheckResult {
    bool passed = false;
    std::string report; // one line per check with max deviations
};

/// Runs the invariant suite (shape preservation, gate range, shortcut
/// identity, group locality, oracle equivalence). padding_bias shifts the
/// conv padding to let tests prove the suite catches broken geometry.
SelfCheckResult self_check(const CrmConfig& cfg, uint64_t seed, int padding_bias = 0);

} // namespace crm
} // namespace docsynth
