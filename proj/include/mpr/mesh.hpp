#pragma once

// Indexed triangle mesh with per-vertex attributes, normal computation
// (with backward pass), adjacency queries and OBJ/PLY export.

#include <cstdio>
#include <fstream>
#include <map>
#include <utility>

#include "mpr/common.hpp"

namespace mpr {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3i> triangles;  // counter-clockwise = outward
    std::vector<Vec3> colors;      // optional, rgb in [0,1]
    std::vector<Vec3> normals;     // optional, unit

    bool empty() const { return triangles.empty(); }
    size_t n_vertices() const { return vertices.size(); }
    size_t n_triangles() const { return triangles.size(); }
};

inline Vec3 face_normal_unnormalized(const TriMesh& m, int t) {
    const Vec3& a = m.vertices[m.triangles[t][0]];
    const Vec3& b = m.vertices[m.triangles[t][1]];
    const Vec3& c = m.vertices[m.triangles[t][2]];
    return (b - a).cross(c - a);  // norm = 2 * area
}

// Area-weighted vertex normals (sum of unnormalized face normals, normalized).
inline void compute_vertex_normals(TriMesh& m) {
    std::vector<Vec3> acc(m.vertices.size(), Vec3::Zero());
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        Vec3 fn = face_normal_unnormalized(m, static_cast<int>(t));
        for (int k = 0; k < 3; ++k) acc[m.triangles[t][k]] += fn;
    }
    m.normals.resize(m.vertices.size());
    for (size_t i = 0; i < acc.size(); ++i) {
        double n = acc[i].norm();
        m.normals[i] = n > 1e-20 ? Vec3(acc[i] / n) : Vec3(0, 0, 1);
    }
}

// Backward of compute_vertex_normals: dL/dnormals -> dL/dvertices (accumulated).
inline void vertex_normals_backward(const TriMesh& m, const std::vector<Vec3>& dnormals,
                                    std::vector<Vec3>& dvertices) {
    std::vector<Vec3> acc(m.vertices.size(), Vec3::Zero());
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        Vec3 fn = face_normal_unnormalized(m, static_cast<int>(t));
        for (int k = 0; k < 3; ++k) acc[m.triangles[t][k]] += fn;
    }
    // d(normalize(a))/da = (I - nn^T)/|a|
    std::vector<Vec3> dacc(m.vertices.size(), Vec3::Zero());
    for (size_t i = 0; i < acc.size(); ++i) {
        double n = acc[i].norm();
        if (n <= 1e-20) continue;
        Vec3 nn = acc[i] / n;
        dacc[i] = (dnormals[i] - nn * nn.dot(dnormals[i])) / n;
    }
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        const Vec3i& tri = m.triangles[t];
        Vec3 g = dacc[tri[0]] + dacc[tri[1]] + dacc[tri[2]];  // dL/d(face normal)
        const Vec3& a = m.vertices[tri[0]];
        const Vec3& b = m.vertices[tri[1]];
        const Vec3& c = m.vertices[tri[2]];
        // fn = (b-a) x (c-a); d(fn)/d(b) applied to g is (c-a) x g, etc.
        Vec3 e1 = b - a, e2 = c - a;
        Vec3 db = e2.cross(g);
        Vec3 dc = g.cross(e1);
        dvertices[tri[1]] += db;
        dvertices[tri[2]] += dc;
        dvertices[tri[0]] -= db + dc;
    }
}

// Pairs of triangle indices sharing an edge.
inline std::vector<std::pair<int, int>> face_adjacency(const TriMesh& m) {
    std::map<std::pair<int, int>, std::vector<int>> edges;
    for (size_t t = 0; t < m.triangles.size(); ++t)
        for (int k = 0; k < 3; ++k) {
            int a = m.triangles[t][k], b = m.triangles[t][(k + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(t));
        }
    std::vector<std::pair<int, int>> pairs;
    for (auto& [e, ts] : edges)
        for (size_t i = 0; i < ts.size(); ++i)
            for (size_t j = i + 1; j < ts.size(); ++j) pairs.emplace_back(ts[i], ts[j]);
    return pairs;
}

// Edges not shared by exactly two triangles. Zero for a watertight mesh.
inline int count_boundary_edges(const TriMesh& m) {
    std::map<std::pair<int, int>, int> edges;
    for (const Vec3i& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}]++;
        }
    int n = 0;
    for (auto& [e, c] : edges)
        if (c != 2) ++n;
    return n;
}

inline int euler_characteristic(const TriMesh& m) {
    std::map<std::pair<int, int>, int> edges;
    for (const Vec3i& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}]++;
        }
    return static_cast<int>(m.vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(m.triangles.size());
}

inline double surface_area(const TriMesh& m) {
    double a = 0.0;
    for (size_t t = 0; t < m.triangles.size(); ++t)
        a += 0.5 * face_normal_unnormalized(m, static_cast<int>(t)).norm();
    return a;
}

// ASCII OBJ; vertex colors as the extended "v x y z r g b" form.
inline void save_obj(const TriMesh& m, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "save_obj: cannot open " + path);
    f.precision(9);
    bool with_color = m.colors.size() == m.vertices.size();
    for (size_t i = 0; i < m.vertices.size(); ++i) {
        const Vec3& v = m.vertices[i];
        f << "v " << v.x() << " " << v.y() << " " << v.z();
        if (with_color) f << " " << m.colors[i].x() << " " << m.colors[i].y() << " " << m.colors[i].z();
        f << "\n";
    }
    if (m.normals.size() == m.vertices.size())
        for (const Vec3& n : m.normals) f << "vn " << n.x() << " " << n.y() << " " << n.z() << "\n";
    bool with_vn = m.normals.size() == m.vertices.size();
    for (const Vec3i& t : m.triangles) {
        if (with_vn)
            f << "f " << t[0] + 1 << "//" << t[0] + 1 << " " << t[1] + 1 << "//" << t[1] + 1 << " "
              << t[2] + 1 << "//" << t[2] + 1 << "\n";
        else
            f << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    }
}

inline TriMesh load_obj(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "load_obj: cannot open " + path);
    TriMesh m;
    std::string tok;
    std::string line;
    while (std::getline(f, line)) {
        if (line.rfind("v ", 0) == 0) {
            double x, y, z, r, g, b;
            int n = std::sscanf(line.c_str(), "v %lf %lf %lf %lf %lf %lf", &x, &y, &z, &r, &g, &b);
            m.vertices.emplace_back(x, y, z);
            if (n == 6) m.colors.emplace_back(r, g, b);
        } else if (line.rfind("vn ", 0) == 0) {
            double x, y, z;
            std::sscanf(line.c_str(), "vn %lf %lf %lf", &x, &y, &z);
            m.normals.emplace_back(x, y, z);
        } else if (line.rfind("f ", 0) == 0) {
            int a, b, c;
            if (std::sscanf(line.c_str(), "f %d//%*d %d//%*d %d//%*d", &a, &b, &c) == 3 ||
                std::sscanf(line.c_str(), "f %d %d %d", &a, &b, &c) == 3)
                m.triangles.emplace_back(a - 1, b - 1, c - 1);
        }
    }
    return m;
}

// Binary little-endian PLY with positions, optional uchar colors.
inline void save_ply(const TriMesh& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "save_ply: cannot open " + path);
    bool with_color = m.colors.size() == m.vertices.size();
    f << "ply\nformat binary_little_endian 1.0\n";
    f << "element vertex " << m.vertices.size() << "\n";
    f << "property float x\nproperty float y\nproperty float z\n";
    if (with_color) f << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    f << "element face " << m.triangles.size() << "\n";
    f << "property list uchar int vertex_indices\nend_header\n";
    for (size_t i = 0; i < m.vertices.size(); ++i) {
        float p[3] = {static_cast<float>(m.vertices[i].x()), static_cast<float>(m.vertices[i].y()),
                      static_cast<float>(m.vertices[i].z())};
        f.write(reinterpret_cast<const char*>(p), 12);
        if (with_color) {
            unsigned char c[3];
            for (int k = 0; k < 3; ++k)
                c[k] = static_cast<unsigned char>(std::lround(clamp01(m.colors[i][k]) * 255.0));
            f.write(reinterpret_cast<const char*>(c), 3);
        }
    }
    for (const Vec3i& t : m.triangles) {
        unsigned char n = 3;
        f.write(reinterpret_cast<const char*>(&n), 1);
        int32_t idx[3] = {t[0], t[1], t[2]};
        f.write(reinterpret_cast<const char*>(idx), 12);
    }
}

}  // namespace mpr
