#include "pvgap/gap_graph.hpp"

#include <algorithm>
#include <limits>

#include "pvgap/parallel.hpp"

namespace pvgap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_over(const DistanceField& f, const std::vector<int>& vs) {
    double best = kInf;
    for (int v : vs) best = std::min(best, f.dist[v]);
    return best;
}

// START sorts before every patch and END after, so only the patch part
// needs comparing; a path that reaches END earlier compares larger at the
// position where the other still lists a patch.
bool sequence_less(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return a.size() > b.size();
}

NodeSequence solve_one(const GapTables& t, std::size_t twin) {
    const int P = t.patch_count;
    const auto& sw = t.start[twin];
    const auto& ew = t.end[twin];
    std::vector<double> dist(P, kInf);
    std::vector<std::vector<int>> path(P);
    std::vector<char> done(P, 0);
    for (int i = 0; i < P; ++i) {
        if (sw[i] < kInf) {
            dist[i] = sw[i];
            path[i] = {i};
        }
    }
    NodeSequence best;
    best.twin = static_cast<int>(twin);
    bool found = false;
    for (;;) {
        int u = -1;
        for (int i = 0; i < P; ++i) {
            if (done[i] || dist[i] == kInf) continue;
            if (u < 0 || dist[i] < dist[u] || (dist[i] == dist[u] && path[i] < path[u])) u = i;
        }
        if (u < 0) break;
        done[u] = 1;
        if (ew[u] < kInf) {
            const double gl = dist[u] + ew[u];
            if (!found || gl < best.gl || (gl == best.gl && sequence_less(path[u], best.patches))) {
                best.gl = gl;
                best.patches = path[u];
                found = true;
            }
        }
        for (int v = 0; v < P; ++v) {
            if (done[v]) continue;
            const double w = t.inter[static_cast<std::size_t>(u) * P + v];
            if (w == kInf) continue;
            const double nd = dist[u] + w;
            if (nd < dist[v] || (nd == dist[v] && [&] {
                    auto cand = path[u];
                    cand.push_back(v);
                    return cand < path[v];
                }())) {
                dist[v] = nd;
                path[v] = path[u];
                path[v].push_back(v);
            }
        }
    }
    if (!found) best.twin = -1;
    return best;
}

std::vector<int> reversed(std::vector<int> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

} // namespace

std::vector<DistanceField> patch_distance_fields(const GeodesicSolver& solver, const PatchLabeling& patches) {
    std::vector<DistanceField> fields(static_cast<std::size_t>(patches.patch_count));
    parallel_for(fields.size(), [&](std::size_t i) { fields[i] = solver.distance_transform(patches.patch_vertices[i]); });
    return fields;
}

GapGraph build_graph(const GeodesicSolver& solver, const Seam& primary, const std::vector<DistanceField>& fields) {
    GapGraph g;
    const int P = static_cast<int>(fields.size());
    g.patch_count = P;
    g.weight.assign(static_cast<std::size_t>(P) * P, 0.0);
    g.geometry.assign(static_cast<std::size_t>(P) * P, InterSetDistance{});
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < P; ++i)
        for (int j = i + 1; j < P; ++j) pairs.emplace_back(i, j);
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        auto d = min_interset_distance(fields[i], fields[j], solver.mesh());
        InterSetDistance back{d.distance, d.endpoint_b, d.endpoint_a, reversed(d.polyline)};
        const std::size_t ij = static_cast<std::size_t>(i) * P + j, ji = static_cast<std::size_t>(j) * P + i;
        g.weight[ij] = g.weight[ji] = d.distance;
        g.geometry[ij] = std::move(d);
        g.geometry[ji] = std::move(back);
    });
    for (int i = 0; i < P; ++i) {
        g.start_weight.push_back(min_over(fields[i], primary.side_a));
        g.end_weight.push_back(min_over(fields[i], primary.side_b));
    }
    return g;
}

NodeSequence solve_gap_tables(const GapTables& tables) {
    const std::size_t twins = tables.start.size();
    std::vector<NodeSequence> per(twins);
    parallel_for(twins, [&](std::size_t t) { per[t] = solve_one(tables, t); });
    NodeSequence best;
    for (const auto& s : per)
        if (s.twin >= 0 && (best.twin < 0 || s.gl < best.gl)) best = s;
    return best;
}

namespace {

void add_gap(EncirclingPathResult& r, double length, std::vector<int> polyline) {
    r.segments.push_back({true, length, std::move(polyline)});
}

void add_nongap(EncirclingPathResult& r, const GeodesicSolver& solver, int from, int to) {
    if (from == to) {
        r.segments.push_back({false, 0.0, {from}});
        return;
    }
    const int src[] = {from};
    const auto f = solver.distance_transform(src);
    if (!f.reachable(to)) throw GapSearchError("patch entry and exit are disconnected");
    r.segments.push_back({false, f.dist[to], reversed(trace_path(f, solver.mesh(), to).vertices)});
}

void finish(EncirclingPathResult& r) {
    r.gl = 0.0;
    r.total_length = 0.0;
    for (const auto& s : r.segments) {
        if (s.gap) r.gl += s.length;
        r.total_length += s.length;
    }
    r.rgm = r.total_length > 0.0 ? r.gl / r.total_length : (r.gl > 0.0 ? 1.0 : 0.0);

    // Gaps touching the cut are the two halves of one gap.
    r.gaps.clear();
    const std::size_t n = r.segments.size();
    const auto& first = r.segments.front();
    const auto& last = r.segments.back();
    if (n == 1) {
        if (first.length > kGapEpsilon) r.gaps.push_back({first.length, first.polyline});
    } else {
        for (std::size_t i = 2; i + 1 < n; i += 2)
            if (r.segments[i].length > kGapEpsilon) r.gaps.push_back({r.segments[i].length, r.segments[i].polyline});
        const double joined = first.length + last.length;
        if (joined > kGapEpsilon) {
            Gap g{joined, last.polyline};
            g.polyline.insert(g.polyline.end(), first.polyline.begin(), first.polyline.end());
            r.gaps.push_back(std::move(g));
        }
    }
    r.gap_count = static_cast<int>(r.gaps.size());
}

} // namespace

EncirclingPathResult min_gap_path(const GapGraph& graph, const GeodesicSolver& solver, const CutMesh& opened,
                                  const std::vector<DistanceField>& fields) {
    if (opened.seams.empty()) throw GapSearchError("opened mesh has no primary seam");
    const Seam& seam = opened.seams[0];
    const std::size_t twins = seam.side_a.size();
    const int P = graph.patch_count;
    EncirclingPathResult r;

    if (P == 0) {
        std::vector<double> loop(twins, kInf);
        std::vector<DistanceField> loop_fields(twins);
        parallel_for(twins, [&](std::size_t t) {
            const int src[] = {seam.side_a[t]};
            loop_fields[t] = solver.distance_transform(src);
            loop[t] = loop_fields[t].dist[seam.side_b[t]];
        });
        std::size_t best = twins;
        for (std::size_t t = 0; t < twins; ++t)
            if (loop[t] < kInf && (best == twins || loop[t] < loop[best])) best = t;
        if (best == twins) throw GapSearchError("no closed path joins the two sides of the cut");
        r.twin = static_cast<int>(best);
        r.p_a = seam.side_a[best];
        r.p_b = seam.side_b[best];
        add_gap(r, loop[best], reversed(trace_path(loop_fields[best], solver.mesh(), r.p_b).vertices));
        finish(r);
        return r;
    }

    GapTables tables;
    tables.patch_count = P;
    tables.inter = graph.weight;
    tables.start.assign(twins, std::vector<double>(P));
    tables.end.assign(twins, std::vector<double>(P));
    for (std::size_t t = 0; t < twins; ++t) {
        for (int i = 0; i < P; ++i) {
            tables.start[t][i] = fields[i].dist[seam.side_a[t]];
            tables.end[t][i] = fields[i].dist[seam.side_b[t]];
        }
    }
    const NodeSequence best = solve_gap_tables(tables);
    if (best.twin < 0) throw GapSearchError("no encircling path reaches both sides of the cut");

    r.twin = best.twin;
    r.patches = best.patches;
    r.p_a = seam.side_a[best.twin];
    r.p_b = seam.side_b[best.twin];
    const auto& mesh = solver.mesh();

    // START stub: p_a down to the first patch.
    const int p1 = r.patches.front();
    const auto stub_in = trace_path(fields[p1], mesh, r.p_a).vertices;
    add_gap(r, fields[p1].dist[r.p_a], stub_in);
    int entry = stub_in.back();
    for (std::size_t k = 0; k + 1 < r.patches.size(); ++k) {
        const auto& g = graph.gap(r.patches[k], r.patches[k + 1]);
        add_nongap(r, solver, entry, g.endpoint_a);
        add_gap(r, g.distance, g.polyline);
        entry = g.endpoint_b;
    }
    const int pm = r.patches.back();
    auto stub_out = trace_path(fields[pm], mesh, r.p_b).vertices;
    add_nongap(r, solver, entry, stub_out.back());
    add_gap(r, fields[pm].dist[r.p_b], reversed(std::move(stub_out)));
    finish(r);
    return r;
}

GapAnalysis analyse_gaps(const GeodesicSolver& solver, const CutMesh& opened, const std::vector<bool>& mask) {
    GapAnalysis a;
    a.patches = connected_components(solver.topology(), mask);
    a.fields = patch_distance_fields(solver, a.patches);
    a.graph = build_graph(solver, opened.seams.at(0), a.fields);
    a.path = min_gap_path(a.graph, solver, opened, a.fields);
    return a;
}

GapRegions gap_regions(const SurfaceMesh& mesh, const std::vector<int>& polyline) {
    GapRegions out;
    if (polyline.empty() || !mesh.region) return out;
    const auto& region = *mesh.region;
    double total = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i)
        total += distance(mesh.vertices[polyline[i - 1]], mesh.vertices[polyline[i]]);
    // Vertex nearest the half-way arc length; the earlier one on a tie.
    double acc = 0.0;
    double best = std::abs(total / 2.0);
    out.midpoint_region = region[polyline[0]];
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        acc += distance(mesh.vertices[polyline[i - 1]], mesh.vertices[polyline[i]]);
        const double off = std::abs(acc - total / 2.0);
        if (off < best) {
            best = off;
            out.midpoint_region = region[polyline[i]];
        }
    }
    for (int v : polyline) out.crossed.push_back(region[v]);
    std::sort(out.crossed.begin(), out.crossed.end());
    out.crossed.erase(std::unique(out.crossed.begin(), out.crossed.end()), out.crossed.end());
    return out;
}

} // namespace pvgap
