#pragma once

// Non-orthogonal multi-plane representation: N view-aligned feature planes
// plus two orthographic top/bottom planes, point-to-plane projection,
// bilinear feature sampling, channel-wise aggregation and MLP decoding.

#include <array>

#include "mpr/camera.hpp"
#include "mpr/common.hpp"

namespace mpr {

struct FeaturePlane {
    enum class Kind { ViewAligned, Top, Bottom };
    Kind kind = Kind::ViewAligned;
    Camera camera;        // view-aligned only
    double extent = 0.5;  // orthographic half-size in world units
    int height = 64, width = 64, channels = 32;
    MatX features;  // (H*W) x C, texel (x, y) at row y*W + x

    static FeaturePlane view_aligned(const Camera& cam, int res, int channels) {
        FeaturePlane p;
        p.kind = Kind::ViewAligned;
        p.camera = cam;
        p.height = p.width = res;
        p.channels = channels;
        p.features = MatX::Zero(res * res, channels);
        return p;
    }
    static FeaturePlane orthographic(Kind kind, double extent, int res, int channels) {
        FeaturePlane p;
        p.kind = kind;
        p.extent = extent;
        p.height = p.width = res;
        p.channels = channels;
        p.features = MatX::Zero(res * res, channels);
        return p;
    }
};

struct PlaneUv {
    double u = 0.0, v = 0.0;
    bool outside = true;
    Eigen::Matrix<double, 2, 3> jac = Eigen::Matrix<double, 2, 3>::Zero();  // d(u,v)/d(point)
};

inline PlaneUv plane_uv(const FeaturePlane& plane, const Vec3& p) {
    PlaneUv out;
    if (plane.kind == FeaturePlane::Kind::ViewAligned) {
        const Camera& cam = plane.camera;
        Mat3 r = cam.rotation();
        Vec3 pv = r * (p - cam.center());
        double depth = -pv.z();
        if (depth <= 0.01) return out;
        const double f = cam.focal();
        out.u = 0.5 + (f / cam.width) * pv.x() / depth;
        out.v = 0.5 - (f / cam.height) * pv.y() / depth;
        if (out.u < 0.0 || out.u > 1.0 || out.v < 0.0 || out.v > 1.0) return out;
        out.outside = false;
        out.jac.row(0) =
            (f / cam.width) * (r.row(0) * depth + pv.x() * r.row(2)) / (depth * depth);
        out.jac.row(1) =
            -(f / cam.height) * (r.row(1) * depth + pv.y() * r.row(2)) / (depth * depth);
    } else {
        // Top viewed along -y, bottom along +y; both map (x, z) linearly.
        const double e = plane.extent;
        out.u = (p.x() + e) / (2.0 * e);
        out.v = (p.z() + e) / (2.0 * e);
        if (out.u < 0.0 || out.u > 1.0 || out.v < 0.0 || out.v > 1.0) {
            out.outside = true;
            return out;
        }
        out.outside = false;
        out.jac(0, 0) = 1.0 / (2.0 * e);
        out.jac(1, 2) = 1.0 / (2.0 * e);
    }
    return out;
}

// One bilinear read from a plane: 4 texel rows, weights and their
// derivatives w.r.t. the query point (through uv).
struct PlaneTap {
    bool outside = true;
    std::array<int, 4> idx{{0, 0, 0, 0}};
    std::array<double, 4> w{{0, 0, 0, 0}};
    std::array<Vec3, 4> dw_dp{{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()}};
};

namespace detail {
inline void texel_axis(double t, int n, int& i0, int& i1, double& frac, double& dfrac_dt,
                       double scale) {
    double x = t * n - 0.5;
    dfrac_dt = scale * n;
    if (x <= 0.0) {
        i0 = i1 = 0;
        frac = 0.0;
        dfrac_dt = 0.0;
    } else if (x >= n - 1) {
        i0 = i1 = n - 1;
        frac = 0.0;
        dfrac_dt = 0.0;
    } else {
        i0 = static_cast<int>(std::floor(x));
        i1 = i0 + 1;
        frac = x - i0;
    }
}
}  // namespace detail

inline PlaneTap plane_tap(const FeaturePlane& plane, const Vec3& p) {
    PlaneTap tap;
    PlaneUv uv = plane_uv(plane, p);
    if (uv.outside) return tap;
    tap.outside = false;
    int x0, x1, y0, y1;
    double fx, fy, dfx, dfy;
    detail::texel_axis(uv.u, plane.width, x0, x1, fx, dfx, 1.0);
    detail::texel_axis(uv.v, plane.height, y0, y1, fy, dfy, 1.0);
    tap.idx = {y0 * plane.width + x0, y0 * plane.width + x1, y1 * plane.width + x0,
               y1 * plane.width + x1};
    tap.w = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    Vec3 du = uv.jac.row(0).transpose() * dfx;
    Vec3 dv = uv.jac.row(1).transpose() * dfy;
    tap.dw_dp[0] = -(1 - fy) * du - (1 - fx) * dv;
    tap.dw_dp[1] = (1 - fy) * du - fx * dv;
    tap.dw_dp[2] = -fy * du + (1 - fx) * dv;
    tap.dw_dp[3] = fy * du + fx * dv;
    return tap;
}

inline VecX sample_feature(const FeaturePlane& plane, double u, double v) {
    require(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0, "sample_feature: uv outside [0,1]^2");
    FeaturePlane probe = plane;  // reuse the tap machinery via an orthographic identity map
    Vec3 p;
    if (plane.kind == FeaturePlane::Kind::ViewAligned) {
        // Build the tap directly from uv.
        PlaneTap tap;
        int x0, x1, y0, y1;
        double fx, fy, dfx, dfy;
        detail::texel_axis(u, plane.width, x0, x1, fx, dfx, 1.0);
        detail::texel_axis(v, plane.height, y0, y1, fy, dfy, 1.0);
        VecX out = VecX::Zero(plane.channels);
        std::array<int, 4> idx = {y0 * plane.width + x0, y0 * plane.width + x1,
                                  y1 * plane.width + x0, y1 * plane.width + x1};
        std::array<double, 4> w = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
        for (int k = 0; k < 4; ++k) out += w[k] * plane.features.row(idx[k]).transpose();
        return out;
    }
    p = Vec3(2.0 * plane.extent * u - plane.extent, 0.0, 2.0 * plane.extent * v - plane.extent);
    PlaneTap tap = plane_tap(probe, p);
    VecX out = VecX::Zero(plane.channels);
    for (int k = 0; k < 4; ++k) out += tap.w[k] * plane.features.row(tap.idx[k]).transpose();
    return out;
}

struct PlaneSet {
    std::vector<FeaturePlane> planes;  // [view_1 .. view_N, top, bottom]
    int n_view = 0;
    int channels = 0;

    int n_planes() const { return static_cast<int>(planes.size()); }
    int feature_dim() const { return n_planes() * channels; }
};

inline PlaneSet make_plane_set(const std::vector<Camera>& view_cams, int plane_res, int channels,
                               double extent, Rng& rng, double init_std = 0.01) {
    PlaneSet ps;
    ps.n_view = static_cast<int>(view_cams.size());
    ps.channels = channels;
    for (const Camera& cam : view_cams)
        ps.planes.push_back(FeaturePlane::view_aligned(cam, plane_res, channels));
    ps.planes.push_back(
        FeaturePlane::orthographic(FeaturePlane::Kind::Top, extent, plane_res, channels));
    ps.planes.push_back(
        FeaturePlane::orthographic(FeaturePlane::Kind::Bottom, extent, plane_res, channels));
    for (FeaturePlane& p : ps.planes)
        for (int i = 0; i < p.features.rows(); ++i)
            for (int c = 0; c < channels; ++c) p.features(i, c) = normal(rng, 0.0, init_std);
    return ps;
}

using TapSet = std::vector<PlaneTap>;  // one tap per plane, in plane order

inline TapSet aggregate_taps(const PlaneSet& ps, const Vec3& p) {
    TapSet taps(ps.planes.size());
    for (size_t i = 0; i < ps.planes.size(); ++i) taps[i] = plane_tap(ps.planes[i], p);
    return taps;
}

inline VecX aggregate_from_taps(const PlaneSet& ps, const TapSet& taps) {
    VecX out = VecX::Zero(ps.feature_dim());
    const int c = ps.channels;
    for (size_t i = 0; i < ps.planes.size(); ++i) {
        if (taps[i].outside) continue;
        auto seg = out.segment(static_cast<int>(i) * c, c);
        for (int k = 0; k < 4; ++k)
            seg += taps[i].w[k] * ps.planes[i].features.row(taps[i].idx[k]).transpose();
    }
    return out;
}

inline VecX aggregate(const PlaneSet& ps, const Vec3& p) {
    require(p.allFinite(), "aggregate: non-finite point");
    return aggregate_from_taps(ps, aggregate_taps(ps, p));
}

// Scatter dL/dfeature into per-plane feature gradients; if dpoint is given,
// also accumulate the gradient w.r.t. the query point.
inline void aggregate_backward(const PlaneSet& ps, const TapSet& taps, const VecX& dfeat,
                               std::vector<MatX>& plane_grads, Vec3* dpoint = nullptr) {
    const int c = ps.channels;
    for (size_t i = 0; i < ps.planes.size(); ++i) {
        if (taps[i].outside) continue;
        auto seg = dfeat.segment(static_cast<int>(i) * c, c);
        for (int k = 0; k < 4; ++k) {
            plane_grads[i].row(taps[i].idx[k]) += taps[i].w[k] * seg.transpose();
            if (dpoint) {
                double s = seg.dot(ps.planes[i].features.row(taps[i].idx[k]).transpose());
                *dpoint += s * taps[i].dw_dp[k];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// MLP decoder: 5 linear layers, softplus hidden activations, linear output.

namespace detail {
inline double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace detail

struct MlpCtx {
    std::vector<MatX> inputs;  // input to each layer (post-activation of previous)
    std::vector<MatX> pre;     // pre-activation of each hidden layer
};

struct MlpGrads {
    std::vector<MatX> dW;
    std::vector<VecX> db;
};

struct Mlp {
    std::vector<MatX> W;  // W[l]: out x in
    std::vector<VecX> b;

    int in_dim() const { return static_cast<int>(W.front().cols()); }
    int out_dim() const { return static_cast<int>(W.back().rows()); }
    int n_layers() const { return static_cast<int>(W.size()); }

    static Mlp make(int in, int hidden, int out, int layers, Rng& rng) {
        require(layers >= 2, "Mlp: need at least 2 layers");
        Mlp m;
        int prev = in;
        for (int l = 0; l < layers; ++l) {
            int cur = (l == layers - 1) ? out : hidden;
            MatX w(cur, prev);
            double std = std::sqrt(2.0 / prev);
            for (int i = 0; i < cur; ++i)
                for (int j = 0; j < prev; ++j) w(i, j) = normal(rng, 0.0, std);
            m.W.push_back(std::move(w));
            m.b.push_back(VecX::Zero(cur));
            prev = cur;
        }
        return m;
    }

    // X: batch x in_dim, returns batch x out_dim.
    MatX forward(const MatX& X, MlpCtx* ctx = nullptr) const {
        require(X.cols() == in_dim(), "Mlp: input dimension mismatch");
        MatX h = X;
        if (ctx) {
            ctx->inputs.clear();
            ctx->pre.clear();
        }
        for (int l = 0; l < n_layers(); ++l) {
            if (ctx) ctx->inputs.push_back(h);
            MatX z = h * W[l].transpose();
            z.rowwise() += b[l].transpose();
            if (l + 1 < n_layers()) {
                if (ctx) ctx->pre.push_back(z);
                h = z.unaryExpr([](double x) { return detail::softplus(x); });
            } else {
                h = std::move(z);
            }
        }
        return h;
    }

    void backward(const MlpCtx& ctx, const MatX& dY, MlpGrads* grads, MatX* dX) const {
        MatX d = dY;
        if (grads && grads->dW.empty()) {
            for (int l = 0; l < n_layers(); ++l) {
                grads->dW.push_back(MatX::Zero(W[l].rows(), W[l].cols()));
                grads->db.push_back(VecX::Zero(b[l].size()));
            }
        }
        for (int l = n_layers() - 1; l >= 0; --l) {
            if (grads) {
                grads->dW[l] += d.transpose() * ctx.inputs[l];
                grads->db[l] += d.colwise().sum().transpose();
            }
            if (l == 0) {
                if (dX) *dX = d * W[0];
                break;
            }
            MatX dh = d * W[l];
            const MatX& z = ctx.pre[l - 1];
            d = dh.binaryExpr(z, [](double g, double x) { return g * detail::sigmoid(x); });
        }
    }
};

// Geometry + color decoders. Geometry outputs (sdf, raw deform x3); deform is
// bounded to +-deform_scale by tanh. Color outputs sigmoid rgb.
struct Decoder {
    Mlp geometry;  // in -> 4
    Mlp color;     // in -> 3
    double deform_scale = 0.45 / 32.0;

    static Decoder make(int in_dim, Rng& rng, int hidden = 64, int layers = 5) {
        Decoder d;
        d.geometry = Mlp::make(in_dim, hidden, 4, layers, rng);
        d.color = Mlp::make(in_dim, hidden, 3, layers, rng);
        return d;
    }

    size_t parameter_count() const {
        size_t n = 0;
        for (const auto& m : {geometry, color})
            for (size_t l = 0; l < m.W.size(); ++l) n += m.W[l].size() + m.b[l].size();
        return n;
    }
};

struct GeometryOut {
    double sdf = 0.0;
    Vec3 deform = Vec3::Zero();
};

inline GeometryOut decode_geometry(const Decoder& dec, const VecX& feature) {
    require(feature.size() == dec.geometry.in_dim(), "decode_geometry: dimension mismatch");
    MatX x(1, feature.size());
    x.row(0) = feature.transpose();
    MatX y = dec.geometry.forward(x);
    GeometryOut out;
    out.sdf = y(0, 0);
    for (int i = 0; i < 3; ++i) out.deform[i] = dec.deform_scale * std::tanh(y(0, 1 + i));
    return out;
}

inline Vec3 decode_color(const Decoder& dec, const VecX& feature) {
    require(feature.size() == dec.color.in_dim(), "decode_color: dimension mismatch");
    MatX x(1, feature.size());
    x.row(0) = feature.transpose();
    MatX y = dec.color.forward(x);
    return Vec3(detail::sigmoid(y(0, 0)), detail::sigmoid(y(0, 1)), detail::sigmoid(y(0, 2)));
}

}  // namespace mpr
