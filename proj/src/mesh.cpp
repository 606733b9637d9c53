#include "dynbc/mesh.hpp"

#include "dynbc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace dynbc {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

bool lex_less(const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

double wrap(double s, double length) {
    double r = std::fmod(s, length);
    if (r < 0.0) r += length;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// BulkMesh

BulkMesh::BulkMesh(int dim, std::vector<Point> nodes, std::vector<std::array<int, 3>> elements)
    : dim_(dim), nodes_(std::move(nodes)), elements_(std::move(elements)) {
    if (dim_ != 1 && dim_ != 2) throw InvalidArgument("BulkMesh: dim must be 1 or 2");
    for (const auto& el : elements_)
        for (int k = 0; k <= dim_; ++k)
            if (el[k] < 0 || static_cast<std::size_t>(el[k]) >= nodes_.size())
                throw InvalidArgument("BulkMesh: element references unknown node");

    if (dim_ == 1) {
        std::map<int, std::vector<std::size_t>> owners;
        for (std::size_t e = 0; e < elements_.size(); ++e)
            for (int k = 0; k < 2; ++k) owners[elements_[e][k]].push_back(e);
        for (const auto& [node, els] : owners)
            if (els.size() == 1) {
                facets_.push_back({node, -1});
                facet_elements_.push_back(els.front());
            }
    } else {
        // Edge key (min, max) -> (oriented edge, element, count).
        struct EdgeInfo {
            std::array<int, 2> oriented;
            std::size_t element;
            int count;
        };
        std::map<std::pair<int, int>, EdgeInfo> edges;
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto& el = elements_[e];
            for (int k = 0; k < 3; ++k) {
                const int a = el[k];
                const int b = el[(k + 1) % 3];
                auto key = std::minmax(a, b);
                auto [it, inserted] = edges.try_emplace({key.first, key.second}, EdgeInfo{{a, b}, e, 0});
                ++it->second.count;
            }
        }
        for (const auto& [key, info] : edges) {
            if (info.count == 1) {
                facets_.push_back(info.oriented);
                facet_elements_.push_back(info.element);
            } else if (info.count > 2) {
                throw InvalidArgument("BulkMesh: edge shared by more than two triangles");
            }
        }
    }

    for (std::size_t f = 0; f < facets_.size(); ++f)
        for (int k = 0; k < dim_; ++k) boundary_nodes_.push_back(facets_[f][k]);
    std::sort(boundary_nodes_.begin(), boundary_nodes_.end());
    boundary_nodes_.erase(std::unique(boundary_nodes_.begin(), boundary_nodes_.end()), boundary_nodes_.end());
}

double BulkMesh::element_measure(std::size_t e) const {
    const auto el = element(e);
    const Point& a = nodes_[el[0]];
    const Point& b = nodes_[el[1]];
    if (dim_ == 1) return b.x - a.x;
    const Point& c = nodes_[el[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point BulkMesh::element_centroid(std::size_t e) const {
    Point c;
    for (int k : element(e)) {
        c.x += nodes_[k].x;
        c.y += nodes_[k].y;
    }
    c.x /= dim_ + 1;
    c.y /= dim_ + 1;
    return c;
}

double BulkMesh::measure() const {
    double total = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) total += element_measure(e);
    return total;
}

double BulkMesh::mesh_size() const {
    double h = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto el = element(e);
        for (std::size_t i = 0; i < el.size(); ++i)
            for (std::size_t j = i + 1; j < el.size(); ++j)
                h = std::max(h, distance(nodes_[el[i]], nodes_[el[j]]));
    }
    return h;
}

void BulkMesh::validate() const {
    for (std::size_t e = 0; e < elements_.size(); ++e)
        if (!(element_measure(e) > 0.0))
            throw InvalidArgument("BulkMesh: element " + std::to_string(e) + " has non-positive measure");

    std::vector<int> facet_nodes;
    for (std::size_t f = 0; f < facets_.size(); ++f) {
        const auto el = element(facet_elements_[f]);
        for (int k = 0; k < dim_; ++k) {
            if (std::find(el.begin(), el.end(), facets_[f][k]) == el.end())
                throw InvalidArgument("BulkMesh: boundary facet not a face of its element");
            facet_nodes.push_back(facets_[f][k]);
        }
    }
    std::sort(facet_nodes.begin(), facet_nodes.end());
    facet_nodes.erase(std::unique(facet_nodes.begin(), facet_nodes.end()), facet_nodes.end());
    if (facet_nodes != boundary_nodes_)
        throw InvalidArgument("BulkMesh: boundary node set differs from facet nodes");

    // A hanging node would lie strictly inside an edge of some triangle.
    if (dim_ == 2) {
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto el = element(e);
            for (int k = 0; k < 3; ++k) {
                const Point& a = nodes_[el[k]];
                const Point& b = nodes_[el[(k + 1) % 3]];
                for (const int bn : boundary_nodes_) {
                    if (bn == el[k] || bn == el[(k + 1) % 3]) continue;
                    const Point& p = nodes_[bn];
                    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
                    const double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
                    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
                    if (std::abs(cross) < 1e-14 && dot > 1e-14 * len2 && dot < len2 * (1 - 1e-14))
                        throw InvalidArgument("BulkMesh: hanging node detected");
                }
            }
        }
    }
}

BulkMesh build_interval_mesh(std::size_t n_elems, double a, double b) {
    if (n_elems == 0) throw InvalidArgument("build_interval_mesh: n_elems must be >= 1");
    if (!(a < b)) throw InvalidArgument("build_interval_mesh: requires a < b");
    std::vector<Point> nodes(n_elems + 1);
    for (std::size_t i = 0; i <= n_elems; ++i)
        nodes[i].x = i == n_elems ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n_elems);
    std::vector<std::array<int, 3>> elements(n_elems);
    for (std::size_t i = 0; i < n_elems; ++i)
        elements[i] = {static_cast<int>(i), static_cast<int>(i + 1), -1};
    return BulkMesh(1, std::move(nodes), std::move(elements));
}

BulkMesh build_square_mesh(std::size_t n) {
    if (n == 0) throw InvalidArgument("build_square_mesh: n_per_side must be >= 1");
    const auto id = [n](std::size_t i, std::size_t j) { return static_cast<int>(j * (n + 1) + i); };
    std::vector<Point> nodes((n + 1) * (n + 1));
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i)
            nodes[id(i, j)] = {static_cast<double>(i) / static_cast<double>(n),
                               static_cast<double>(j) / static_cast<double>(n)};
    std::vector<std::array<int, 3>> elements;
    elements.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return BulkMesh(2, std::move(nodes), std::move(elements));
}

BulkMesh renumber_nodes(const BulkMesh& mesh, std::span<const int> perm) {
    if (perm.size() != mesh.num_nodes()) throw InvalidArgument("renumber_nodes: permutation size mismatch");
    std::vector<Point> nodes(mesh.num_nodes());
    for (std::size_t i = 0; i < perm.size(); ++i) nodes[perm[i]] = mesh.node(i);
    std::vector<std::array<int, 3>> elements(mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        elements[e] = {-1, -1, -1};
        const auto el = mesh.element(e);
        for (std::size_t k = 0; k < el.size(); ++k) elements[e][k] = perm[el[k]];
    }
    return BulkMesh(mesh.dim(), std::move(nodes), std::move(elements));
}

// ---------------------------------------------------------------------------
// BoundaryMesh

double BoundaryMesh::segment_length(std::size_t k) const {
    if (dim_ != 2) return 0.0;
    const std::size_t n = arc_.size();
    return k + 1 < n ? arc_[k + 1] - arc_[k] : arc_[0] + length_ - arc_[k];
}

std::pair<std::size_t, double> BoundaryMesh::locate(double s) const {
    if (dim_ != 2) throw InvalidArgument("BoundaryMesh::locate: no arc-length structure in 1D");
    double r = wrap(s, length_);
    if (r < arc_.front()) r += length_;
    auto it = std::upper_bound(arc_.begin(), arc_.end(), r);
    const std::size_t k = static_cast<std::size_t>(it - arc_.begin()) - 1;
    const double local = (r - arc_[k]) / segment_length(k);
    return {k, std::clamp(local, 0.0, 1.0)};
}

Point BoundaryMesh::embed(double s) const {
    if (dim_ == 1) {
        // Arc coordinates of the 1D boundary are the endpoint coordinates.
        return {s, 0.0};
    }
    const double r = wrap(s, length_);
    auto it = std::upper_bound(curve_arc_.begin(), curve_arc_.end(), r);
    const std::size_t k = it == curve_arc_.begin() ? curve_arc_.size() - 1
                                                   : static_cast<std::size_t>(it - curve_arc_.begin()) - 1;
    const std::size_t k1 = (k + 1) % curve_pts_.size();
    const double s0 = curve_arc_[k];
    const double s1 = k1 == 0 ? length_ : curve_arc_[k1];
    const double theta = (r - s0) / (s1 - s0);
    const Point& a = curve_pts_[k];
    const Point& b = curve_pts_[k1];
    return {a.x + theta * (b.x - a.x), a.y + theta * (b.y - a.y)};
}

BoundaryPoint BoundaryMesh::at(double s) const {
    if (dim_ == 1) {
        const std::size_t j = std::abs(s - arc_[0]) <= std::abs(s - arc_[1]) ? 0 : 1;
        return vertex_point(j);
    }
    const double r = wrap(s, length_);
    auto it = std::upper_bound(curve_arc_.begin(), curve_arc_.end(), r);
    const std::size_t k = it == curve_arc_.begin() ? curve_arc_.size() - 1
                                                   : static_cast<std::size_t>(it - curve_arc_.begin()) - 1;
    return {embed(r), r, curve_normals_[k]};
}

BoundaryPoint BoundaryMesh::vertex_point(std::size_t j) const {
    if (dim_ == 1) return {{arc_[j], 0.0}, arc_[j], normals_[j]};
    return at(arc_[j]);
}

bool BoundaryMesh::same_partition(const BoundaryMesh& other, double tol) const {
    if (dim_ != other.dim_ || arc_.size() != other.arc_.size()) return false;
    if (std::abs(length_ - other.length_) > tol * std::max(1.0, length_)) return false;
    for (std::size_t j = 0; j < arc_.size(); ++j)
        if (std::abs(arc_[j] - other.arc_[j]) > tol * std::max(1.0, length_)) return false;
    return true;
}

void BoundaryMesh::validate() const {
    for (const Point& n : normals_)
        if (std::abs(std::hypot(n.x, n.y) - 1.0) > 1e-12) throw InvalidArgument("BoundaryMesh: normal not unit length");
    if (dim_ == 1) {
        if (arc_.size() != 2 || !(arc_[0] < arc_[1])) throw InvalidArgument("BoundaryMesh: 1D boundary needs two endpoints");
        return;
    }
    if (arc_.size() < 2) throw InvalidArgument("BoundaryMesh: closed curve needs at least two segments");
    for (std::size_t j = 0; j + 1 < arc_.size(); ++j)
        if (!(arc_[j] < arc_[j + 1])) throw InvalidArgument("BoundaryMesh: arc coordinates not strictly increasing");
    if (arc_.front() < 0.0 || arc_.back() >= length_) throw InvalidArgument("BoundaryMesh: arc coordinates outside [0, L)");
    double total = 0.0;
    for (std::size_t k = 0; k < num_segments(); ++k) total += segment_length(k);
    if (std::abs(total - length_) > 1e-12 * length_) throw InvalidArgument("BoundaryMesh: segment lengths do not sum to L");
}

BoundaryMesh extract_boundary_mesh(const BulkMesh& mesh) {
    BoundaryMesh bm;
    bm.dim_ = mesh.dim();
    if (mesh.dim() == 1) {
        std::vector<std::size_t> facets(mesh.num_boundary_facets());
        std::iota(facets.begin(), facets.end(), 0);
        if (facets.size() != 2) throw InvalidArgument("extract_boundary_mesh: interval must have two endpoints");
        std::sort(facets.begin(), facets.end(), [&](std::size_t a, std::size_t b) {
            return mesh.node(mesh.boundary_facet(a)[0]).x < mesh.node(mesh.boundary_facet(b)[0]).x;
        });
        std::vector<int> ids;
        for (std::size_t f : facets) {
            const int node = mesh.boundary_facet(f)[0];
            ids.push_back(node);
            bm.arc_.push_back(mesh.node(node).x);
            const Point c = mesh.element_centroid(mesh.facet_element(f));
            bm.normals_.push_back({mesh.node(node).x > c.x ? 1.0 : -1.0, 0.0});
        }
        bm.length_ = 2.0;
        bm.bulk_ids_ = std::move(ids);
        return bm;
    }

    // Facets are oriented counter-clockwise (domain on the left); chain them
    // starting from the lexicographically smallest boundary node.
    std::map<int, std::size_t> outgoing;
    for (std::size_t f = 0; f < mesh.num_boundary_facets(); ++f) {
        const int start = mesh.boundary_facet(f)[0];
        if (!outgoing.emplace(start, f).second)
            throw InvalidArgument("extract_boundary_mesh: boundary is not a single closed curve");
    }
    const auto& bnodes = mesh.boundary_node_ids();
    if (bnodes.empty()) throw InvalidArgument("extract_boundary_mesh: mesh has no boundary");
    int anchor = bnodes.front();
    for (int n : bnodes)
        if (lex_less(mesh.node(n), mesh.node(anchor))) anchor = n;

    std::vector<int> chain;
    std::vector<std::size_t> chain_facets;
    int current = anchor;
    do {
        auto it = outgoing.find(current);
        if (it == outgoing.end()) throw InvalidArgument("extract_boundary_mesh: boundary chain is open");
        chain.push_back(current);
        chain_facets.push_back(it->second);
        current = mesh.boundary_facet(it->second)[1];
        if (chain.size() > mesh.num_boundary_facets())
            throw InvalidArgument("extract_boundary_mesh: boundary is not a single closed curve");
    } while (current != anchor);
    if (chain.size() != mesh.num_boundary_facets())
        throw InvalidArgument("extract_boundary_mesh: boundary is not a single closed curve (multiply connected)");

    double s = 0.0;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const std::size_t f = chain_facets[k];
        const Point& a = mesh.node(mesh.boundary_facet(f)[0]);
        const Point& b = mesh.node(mesh.boundary_facet(f)[1]);
        const double len = distance(a, b);
        Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
        const Point c = mesh.element_centroid(mesh.facet_element(f));
        const double outward = n.x * (0.5 * (a.x + b.x) - c.x) + n.y * (0.5 * (a.y + b.y) - c.y);
        if (outward < 0.0) n = {-n.x, -n.y};
        bm.arc_.push_back(s);
        bm.normals_.push_back(n);
        bm.curve_pts_.push_back(a);
        s += len;
    }
    bm.length_ = s;
    bm.curve_arc_ = bm.arc_;
    bm.curve_normals_ = bm.normals_;
    bm.bulk_ids_ = std::move(chain);
    return bm;
}

BoundaryMesh build_independent_boundary_mesh(const BoundaryMesh& curve, std::size_t m, double offset) {
    if (curve.dim() != 2) throw InvalidArgument("build_independent_boundary_mesh: requires a closed curve (dim 2)");
    BoundaryMesh bm = build_independent_boundary_mesh(curve.length(), m, offset);
    bm.curve_arc_ = curve.curve_arc_;
    bm.curve_pts_ = curve.curve_pts_;
    bm.curve_normals_ = curve.curve_normals_;
    for (std::size_t k = 0; k < m; ++k) bm.normals_[k] = bm.at(bm.arc_[k] + 0.5 * bm.segment_length(k)).normal;
    return bm;
}

BoundaryMesh build_independent_boundary_mesh(double length, std::size_t m, double offset) {
    if (m < 2) throw InvalidArgument("build_independent_boundary_mesh: m must be >= 2");
    if (!(length > 0.0)) throw InvalidArgument("build_independent_boundary_mesh: L must be positive");
    const double h = length / static_cast<double>(m);
    if (!(offset >= 0.0 && offset < h)) throw InvalidArgument("build_independent_boundary_mesh: offset must lie in [0, L/m)");
    BoundaryMesh bm;
    bm.dim_ = 2;
    bm.length_ = length;
    for (std::size_t j = 0; j < m; ++j) bm.arc_.push_back(offset + h * static_cast<double>(j));
    // Default geometry: circle of circumference L.
    const double radius = length / (2.0 * M_PI);
    for (std::size_t j = 0; j < m; ++j) {
        const double phi = 2.0 * M_PI * (bm.arc_[j] + 0.5 * h) / length;
        bm.normals_.push_back({std::cos(phi), std::sin(phi)});
    }
    const std::size_t nc = std::max<std::size_t>(m, 64);
    for (std::size_t j = 0; j < nc; ++j) {
        const double sj = length * static_cast<double>(j) / static_cast<double>(nc);
        const double phi = 2.0 * M_PI * sj / length;
        const double phim = 2.0 * M_PI * (sj + 0.5 * length / static_cast<double>(nc)) / length;
        bm.curve_arc_.push_back(sj);
        bm.curve_pts_.push_back({radius * std::cos(phi), radius * std::sin(phi)});
        bm.curve_normals_.push_back({std::cos(phim), std::sin(phim)});
    }
    return bm;
}

std::string mesh_to_json(const BulkMesh& mesh, const BoundaryMesh& boundary) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const Point& p : mesh.nodes())
        doc["nodes"].push_back(mesh.dim() == 1 ? nlohmann::ordered_json::array({p.x})
                                               : nlohmann::ordered_json::array({p.x, p.y}));
    doc["elements"] = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto el = mesh.element(e);
        doc["elements"].push_back(std::vector<int>(el.begin(), el.end()));
    }
    doc["boundary_facets"] = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < mesh.num_boundary_facets(); ++f) {
        const auto fc = mesh.boundary_facet(f);
        doc["boundary_facets"].push_back(std::vector<int>(fc.begin(), fc.end()));
    }
    doc["arc_coords"] = boundary.arc_coords();
    return doc.dump(2);
}

}  // namespace dynbc
