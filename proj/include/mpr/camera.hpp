#pragma once

// Cameras, Plücker ray embeddings and the view/light sampling
// distributions shared by the rest of the library.
//
// World convention: right-handed, y-up; the object of interest lives in
// [-0.5, 0.5]^3 around the origin.

#include <optional>

#include "mpr/common.hpp"

namespace mpr {

struct Camera {
    double azimuth = 0.0;    // radians
    double elevation = 0.0;  // radians
    double distance = 2.0;   // world units, > 0
    double fov_y = deg2rad(40.0);
    int width = 128;
    int height = 128;
    Vec3 look_at = Vec3::Zero();
    Vec3 up = Vec3::UnitY();

    Vec3 center() const {
        return look_at + distance * Vec3(std::cos(elevation) * std::sin(azimuth),
                                         std::sin(elevation),
                                         std::cos(elevation) * std::cos(azimuth));
    }

    // Rotation world -> view; view space looks down -z, x right, y up.
    Mat3 rotation() const {
        Vec3 f = (look_at - center()).normalized();
        Vec3 s = f.cross(up);
        if (s.norm() < 1e-9) s = f.cross(Vec3::UnitX());  // looking straight up/down
        s.normalize();
        Vec3 u = s.cross(f);
        Mat3 r;
        r.row(0) = s.transpose();
        r.row(1) = u.transpose();
        r.row(2) = (-f).transpose();
        return r;
    }

    double focal() const { return 0.5 * height / std::tan(0.5 * fov_y); }
};

inline Camera make_camera(double azimuth, double elevation, double distance,
                          double fov_y = deg2rad(40.0), int width = 128, int height = 128) {
    require(std::isfinite(azimuth) && std::isfinite(elevation) && std::isfinite(distance) &&
                std::isfinite(fov_y),
            "make_camera: non-finite input");
    require(distance > 0.0, "make_camera: distance must be > 0");
    require(fov_y > 0.0 && fov_y < kPi, "make_camera: fov_y must lie in (0, pi)");
    Camera c;
    c.azimuth = azimuth;
    c.elevation = elevation;
    c.distance = distance;
    c.fov_y = fov_y;
    c.width = width;
    c.height = height;
    return c;
}

struct PluckerRay {
    Vec3 direction;  // unit
    Vec3 moment;     // origin x direction, origin-independent along the ray
};

// Continuous pixel coordinates; pixel (i, j)'s center is (i + 0.5, j + 0.5).
inline PluckerRay pixel_ray(const Camera& cam, double pu, double pv) {
    const double f = cam.focal();
    Vec3 dir_view((pu - 0.5 * cam.width) / f, (0.5 * cam.height - pv) / f, -1.0);
    Vec3 dir = cam.rotation().transpose() * dir_view;
    dir.normalize();
    PluckerRay r;
    r.direction = dir;
    r.moment = cam.center().cross(dir);
    return r;
}

struct Projection {
    double u = 0.0, v = 0.0;
    double depth = 0.0;  // positive distance along the forward axis
    bool clipped = false;
};

inline Projection project(const Camera& cam, const Vec3& p, double near_plane = 0.01) {
    Vec3 pv = cam.rotation() * (p - cam.center());
    Projection out;
    out.depth = -pv.z();
    if (out.depth <= near_plane) {
        out.clipped = true;
        return out;
    }
    const double f = cam.focal();
    out.u = 0.5 * cam.width + f * pv.x() / out.depth;
    out.v = 0.5 * cam.height - f * pv.y() / out.depth;
    return out;
}

inline Vec3 unproject(const Camera& cam, double pu, double pv, double depth) {
    const double f = cam.focal();
    Vec3 pview((pu - 0.5 * cam.width) * depth / f, (0.5 * cam.height - pv) * depth / f, -depth);
    return cam.center() + cam.rotation().transpose() * pview;
}

struct LightSample {
    Vec3 position = Vec3(0, 0, 8);
    double intensity = 0.7;
    double ambient = 0.3;
};

struct LightConfig {
    double dist_min = 7.5;
    double dist_max = 10.0;
    double cone_half_angle = deg2rad(30.0);
    double intensity = 0.7;
    double ambient = 0.3;
};

// Refinement-stage camera distribution: elevation U(-10, 45) deg,
// azimuth U(-180, 180) deg, distance U(1, 1.2), fov fixed at 40 deg.
inline Camera sample_refine_camera(Rng& rng, int width = 128, int height = 128) {
    double el = deg2rad(uniform(rng, -10.0, 45.0));
    double az = deg2rad(uniform(rng, -180.0, 180.0));
    double d = uniform(rng, 1.0, 1.2);
    return make_camera(az, el, d, deg2rad(40.0), width, height);
}

// Point light at distance [7.5, 10] from the origin, within a cone
// around the camera direction.
inline LightSample sample_point_light(const Camera& cam, Rng& rng,
                                      const LightConfig& cfg = LightConfig{}) {
    Vec3 axis = cam.center().normalized();
    double cos_max = std::cos(cfg.cone_half_angle);
    double c = uniform(rng, cos_max, 1.0);
    double phi = uniform(rng, 0.0, 2.0 * kPi);
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    // Orthonormal frame around the axis.
    Vec3 t0 = axis.cross(std::abs(axis.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX()).normalized();
    Vec3 t1 = axis.cross(t0);
    Vec3 dir = c * axis + s * (std::cos(phi) * t0 + std::sin(phi) * t1);
    double r = uniform(rng, cfg.dist_min, cfg.dist_max);
    LightSample light;
    light.position = r * dir;
    light.intensity = cfg.intensity;
    light.ambient = cfg.ambient;
    return light;
}

}  // namespace mpr
