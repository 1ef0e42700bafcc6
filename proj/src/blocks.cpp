#include "ecx/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "ecx/csv.hpp"
#include "ecx/parallel.hpp"
#include "ecx/rng.hpp"

namespace ecx {

BipartiteGraph BipartiteGraph::from_binary(const BinaryMatrix& binary) {
    BipartiteGraph g;
    g.rows = binary.rows;
    g.cols = binary.cols;
    g.row_adj.assign(static_cast<std::size_t>(binary.m.rows()), {});
    g.col_adj.assign(static_cast<std::size_t>(binary.m.cols()), {});
    g.row_degree.assign(static_cast<std::size_t>(binary.m.rows()), 0);
    g.col_degree.assign(static_cast<std::size_t>(binary.m.cols()), 0);
    for (int r = 0; r < binary.m.rows(); ++r) {
        for (std::size_t k = binary.m.row_begin(r); k < binary.m.row_end(r); ++k) {
            const int c = binary.m.col(k);
            g.row_adj[static_cast<std::size_t>(r)].push_back(c);
            g.col_adj[static_cast<std::size_t>(c)].push_back(r);
            ++g.row_degree[static_cast<std::size_t>(r)];
            ++g.col_degree[static_cast<std::size_t>(c)];
            ++g.edges;
        }
    }
    return g;
}

double bipartite_modularity(const BipartiteGraph& graph, const std::vector<int>& row_labels,
                            const std::vector<int>& col_labels) {
    if (graph.edges == 0) throw ComputeError("bipartite_modularity: graph has no edges");
    const double m = static_cast<double>(graph.edges);

    double in_edges = 0.0;
    for (std::size_t r = 0; r < graph.row_adj.size(); ++r)
        for (int c : graph.row_adj[r])
            if (row_labels[r] == col_labels[static_cast<std::size_t>(c)]) in_edges += 1.0;

    // Degree mass per label on each side; only labels present on both sides matter.
    std::unordered_map<int, double> k_rows, k_cols;
    for (std::size_t r = 0; r < graph.row_adj.size(); ++r)
        if (graph.row_degree[r] > 0) k_rows[row_labels[r]] += graph.row_degree[r];
    for (std::size_t c = 0; c < graph.col_adj.size(); ++c)
        if (graph.col_degree[c] > 0) k_cols[col_labels[c]] += graph.col_degree[c];

    double null_mass = 0.0;
    for (const auto& [label, kr] : k_rows) {
        auto it = k_cols.find(label);
        if (it != k_cols.end()) null_mass += kr * it->second;
    }
    return (in_edges - null_mass / m) / m;
}

namespace {

struct BrimRun {
    std::vector<int> row_label;
    std::vector<int> col_label;
    double q = -2.0;
    std::vector<double> sweep_q;
    bool converged = false;
};

// One half-sweep: move every active node on one side to its best label given
// the other side's labels. Returns the number of moved nodes.
int reassign_side(const std::vector<std::vector<int>>& adj, const std::vector<int>& degree,
                  const std::vector<int>& active, const std::vector<int>& other_label,
                  const std::vector<double>& other_mass, double m, int n_labels,
                  std::vector<int>& label, std::vector<double>& scorebuf, std::vector<int>& touched) {
    // Cheapest label by opposite-side degree mass; an empty label scores zero,
    // which beats any all-negative neighborhood.
    int cheapest = 0;
    for (int l = 1; l < n_labels; ++l)
        if (other_mass[static_cast<std::size_t>(l)] < other_mass[static_cast<std::size_t>(cheapest)]) cheapest = l;

    int moved = 0;
    for (int node : active) {
        const auto ni = static_cast<std::size_t>(node);
        touched.clear();
        for (int nb : adj[ni]) {
            const int l = other_label[static_cast<std::size_t>(nb)];
            if (scorebuf[static_cast<std::size_t>(l)] == 0.0) touched.push_back(l);
            scorebuf[static_cast<std::size_t>(l)] += 1.0;
        }
        const double k_over_m = static_cast<double>(degree[ni]) / m;
        int best = cheapest;
        double best_score = -k_over_m * other_mass[static_cast<std::size_t>(cheapest)];
        std::sort(touched.begin(), touched.end()); // deterministic tie-break to the lowest label
        for (int l : touched) {
            const double s = scorebuf[static_cast<std::size_t>(l)] - k_over_m * other_mass[static_cast<std::size_t>(l)];
            if (s > best_score + 1e-15 || (std::abs(s - best_score) <= 1e-15 && l < best)) {
                best = l;
                best_score = s;
            }
        }
        for (int l : touched) scorebuf[static_cast<std::size_t>(l)] = 0.0;
        if (label[ni] != best) {
            label[ni] = best;
            ++moved;
        }
    }
    return moved;
}

void side_mass(const std::vector<int>& active, const std::vector<int>& degree, const std::vector<int>& label,
               std::vector<double>& mass) {
    std::fill(mass.begin(), mass.end(), 0.0);
    for (int node : active)
        mass[static_cast<std::size_t>(label[static_cast<std::size_t>(node)])] +=
            static_cast<double>(degree[static_cast<std::size_t>(node)]);
}

BrimRun brim_single(const BipartiteGraph& graph, const std::vector<int>& active_rows,
                    const std::vector<int>& active_cols, int n_labels, Rng rng, int max_sweeps) {
    BrimRun run;
    run.row_label.assign(graph.row_adj.size(), 0);
    run.col_label.assign(graph.col_adj.size(), 0);
    const double m = static_cast<double>(graph.edges);

    // Random initialization on the smaller active side; the first half-sweep
    // then assigns the other side greedily.
    const bool rows_first = active_cols.size() <= active_rows.size();
    if (rows_first) {
        for (int c : active_cols)
            run.col_label[static_cast<std::size_t>(c)] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_labels)));
    } else {
        for (int r : active_rows)
            run.row_label[static_cast<std::size_t>(r)] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_labels)));
    }

    std::vector<double> row_mass(static_cast<std::size_t>(n_labels), 0.0);
    std::vector<double> col_mass(static_cast<std::size_t>(n_labels), 0.0);
    std::vector<double> scorebuf(static_cast<std::size_t>(n_labels), 0.0);
    std::vector<int> touched;
    touched.reserve(64);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        int moved = 0;
        if (rows_first) {
            side_mass(active_cols, graph.col_degree, run.col_label, col_mass);
            moved += reassign_side(graph.row_adj, graph.row_degree, active_rows, run.col_label, col_mass, m,
                                   n_labels, run.row_label, scorebuf, touched);
            side_mass(active_rows, graph.row_degree, run.row_label, row_mass);
            moved += reassign_side(graph.col_adj, graph.col_degree, active_cols, run.row_label, row_mass, m,
                                   n_labels, run.col_label, scorebuf, touched);
        } else {
            side_mass(active_rows, graph.row_degree, run.row_label, row_mass);
            moved += reassign_side(graph.col_adj, graph.col_degree, active_cols, run.row_label, row_mass, m,
                                   n_labels, run.col_label, scorebuf, touched);
            side_mass(active_cols, graph.col_degree, run.col_label, col_mass);
            moved += reassign_side(graph.row_adj, graph.row_degree, active_rows, run.col_label, col_mass, m,
                                   n_labels, run.row_label, scorebuf, touched);
        }
        run.sweep_q.push_back(bipartite_modularity(graph, run.row_label, run.col_label));
        if (moved == 0 && sweep > 0) {
            run.converged = true;
            break;
        }
    }
    run.q = run.sweep_q.back();
    return run;
}

} // namespace

BlockPartition brim(const BipartiteGraph& graph, std::uint64_t seed, const BrimOptions& options,
                    WarningLog* warnings) {
    if (graph.edges == 0) throw ComputeError("brim: graph has no edges");

    std::vector<int> active_rows, active_cols;
    for (std::size_t r = 0; r < graph.row_adj.size(); ++r)
        if (graph.row_degree[r] > 0) active_rows.push_back(static_cast<int>(r));
    for (std::size_t c = 0; c < graph.col_adj.size(); ++c)
        if (graph.col_degree[c] > 0) active_cols.push_back(static_cast<int>(c));

    const int cap = static_cast<int>(std::min(active_rows.size(), active_cols.size()));
    std::vector<int> candidates;
    if (options.max_blocks > 0) {
        candidates.push_back(std::min(options.max_blocks, cap));
    } else {
        // Doubling scan over block counts; the best Q across the scan wins.
        for (int c = 2; c <= std::min(cap, 64); c *= 2) candidates.push_back(c);
        if (cap < 64 && (candidates.empty() || candidates.back() != cap)) candidates.push_back(std::min(cap, 64));
        if (candidates.empty()) candidates.push_back(1);
    }

    struct Job {
        int n_labels;
        std::uint64_t stream;
    };
    std::vector<Job> jobs;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci)
        for (int r = 0; r < options.restarts; ++r)
            jobs.push_back({candidates[ci], ci * static_cast<std::size_t>(options.restarts) + static_cast<std::size_t>(r)});

    std::vector<BrimRun> runs(jobs.size());
    parallel_for(0, jobs.size(), [&](std::size_t j) {
        runs[j] = brim_single(graph, active_rows, active_cols, jobs[j].n_labels,
                              Rng::derive(seed, jobs[j].stream), options.max_sweeps);
    });

    std::size_t best = 0;
    for (std::size_t j = 1; j < runs.size(); ++j)
        if (runs[j].q > runs[best].q) best = j;
    const BrimRun& winner = runs[best];
    if (!winner.converged && warnings != nullptr)
        warnings->add("brim: best run hit the sweep cap (" + std::to_string(options.max_sweeps) +
                      ") before a fixed point");

    BlockPartition out;
    out.rows = graph.rows;
    out.cols = graph.cols;
    out.seed = seed;
    out.sweep_modularity = winner.sweep_q;
    out.converged = winner.converged;
    out.row_label.assign(graph.row_adj.size(), -1);
    out.col_label.assign(graph.col_adj.size(), -1);

    // Compact labels of active nodes, then give isolated nodes singleton blocks.
    std::unordered_map<int, int> relabel;
    auto compact = [&relabel](int l) {
        auto it = relabel.find(l);
        if (it != relabel.end()) return it->second;
        const int id = static_cast<int>(relabel.size());
        relabel.emplace(l, id);
        return id;
    };
    for (int r : active_rows) out.row_label[static_cast<std::size_t>(r)] = compact(winner.row_label[static_cast<std::size_t>(r)]);
    for (int c : active_cols) out.col_label[static_cast<std::size_t>(c)] = compact(winner.col_label[static_cast<std::size_t>(c)]);
    int next = static_cast<int>(relabel.size());
    for (std::size_t r = 0; r < out.row_label.size(); ++r)
        if (out.row_label[r] < 0) out.row_label[r] = next++;
    for (std::size_t c = 0; c < out.col_label.size(); ++c)
        if (out.col_label[c] < 0) out.col_label[c] = next++;
    out.n_blocks = next;
    out.modularity = bipartite_modularity(graph, out.row_label, out.col_label);
    return out;
}

BlockDiversification block_diversification(const BinaryMatrix& binary, const BlockPartition& partition) {
    BlockDiversification out;
    out.firms = binary.rows;
    const int n_firms = binary.m.rows();
    out.d_in.assign(static_cast<std::size_t>(n_firms), 0);
    out.d_out.assign(static_cast<std::size_t>(n_firms), 0);
    out.d_total.assign(static_cast<std::size_t>(n_firms), 0);

    // The partition may index nodes differently (e.g. HS4 detection mapped to
    // HS6); match by name and require full coverage.
    std::vector<int> firm_label(static_cast<std::size_t>(n_firms));
    for (int f = 0; f < n_firms; ++f) {
        const int id = partition.rows.find(binary.rows.name(f));
        if (id < 0) throw ValidationError("block_diversification: partition does not cover firm " + binary.rows.name(f));
        firm_label[static_cast<std::size_t>(f)] = partition.row_label[static_cast<std::size_t>(id)];
    }
    std::vector<int> product_label(static_cast<std::size_t>(binary.m.cols()));
    for (int p = 0; p < binary.m.cols(); ++p) {
        const int id = partition.cols.find(binary.cols.name(p));
        if (id < 0)
            throw ValidationError("block_diversification: partition does not cover product " + binary.cols.name(p));
        product_label[static_cast<std::size_t>(p)] = partition.col_label[static_cast<std::size_t>(id)];
    }

    for (int f = 0; f < n_firms; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        for (std::size_t k = binary.m.row_begin(f); k < binary.m.row_end(f); ++k) {
            if (product_label[static_cast<std::size_t>(binary.m.col(k))] == firm_label[fi])
                ++out.d_in[fi];
            else
                ++out.d_out[fi];
        }
        out.d_total[fi] = out.d_in[fi] + out.d_out[fi];
    }
    return out;
}

BlockPartition sector_partition(const ExportMatrix& matrix, const HsMap& hs_map) {
    BlockPartition out;
    out.rows = matrix.rows;
    out.cols = matrix.cols;
    out.n_blocks = kHsSectionCount + 1; // labels are section indices 1..21
    out.row_label.assign(static_cast<std::size_t>(matrix.rows.size()), -1);
    out.col_label.assign(static_cast<std::size_t>(matrix.cols.size()), -1);
    out.row_tie.assign(static_cast<std::size_t>(matrix.rows.size()), false);

    std::vector<int> section_of(static_cast<std::size_t>(matrix.cols.size()));
    for (int p = 0; p < matrix.cols.size(); ++p) {
        const std::string& code = matrix.cols.name(p);
        int section = -1;
        if (code.size() == 4)
            section = hs_map.section_of_hs4(code);
        else if (const HsEntry* e = hs_map.try_resolve(code); e != nullptr)
            section = e->section;
        if (section < 0) throw ValidationError("sector_partition: HS map does not cover product " + code);
        section_of[static_cast<std::size_t>(p)] = section;
        out.col_label[static_cast<std::size_t>(p)] = section;
    }

    for (int f = 0; f < matrix.rows.size(); ++f) {
        double by_section[kHsSectionCount + 1] = {};
        for (std::size_t k = matrix.m.row_begin(f); k < matrix.m.row_end(f); ++k)
            by_section[section_of[static_cast<std::size_t>(matrix.m.col(k))]] += matrix.m.value(k);
        int best = -1;
        bool tie = false;
        for (int s = 1; s <= kHsSectionCount; ++s) {
            if (by_section[s] <= 0.0) continue;
            if (best < 0 || by_section[s] > by_section[best]) {
                best = s;
                tie = false;
            } else if (by_section[s] == by_section[best]) {
                tie = true; // keep the lower section index
            }
        }
        out.row_label[static_cast<std::size_t>(f)] = best; // -1 for firms without exports
        out.row_tie[static_cast<std::size_t>(f)] = tie;
    }
    return out;
}

BlockPartition map_blocks_hs4_to_hs6(const BlockPartition& partition, const HsMap& hs_map,
                                     const Interner& hs6_products) {
    BlockPartition out;
    out.rows = partition.rows;
    out.row_label = partition.row_label;
    out.row_tie = partition.row_tie;
    out.n_blocks = partition.n_blocks;
    out.modularity = partition.modularity;
    out.seed = partition.seed;
    out.sweep_modularity = partition.sweep_modularity;
    out.converged = partition.converged;

    out.cols = hs6_products;
    out.col_label.assign(static_cast<std::size_t>(hs6_products.size()), -1);
    for (int p = 0; p < hs6_products.size(); ++p) {
        const std::string& hs6 = hs6_products.name(p);
        int id = partition.cols.find(hs6); // identity when detection already ran at HS6
        if (id < 0) {
            const HsEntry& e = hs_map.resolve(hs6);
            id = partition.cols.find(e.hs4);
            if (id < 0)
                throw ComputeError("map_blocks_hs4_to_hs6: partition has no block for heading " + e.hs4 +
                                   " (product " + hs6 + ")");
        }
        out.col_label[static_cast<std::size_t>(p)] = partition.col_label[static_cast<std::size_t>(id)];
    }
    return out;
}

void write_partition(const BlockPartition& partition, const std::string& path) {
    CsvWriter out(path, {"node_type", "node_id", "block_id"});
    for (int f = 0; f < partition.rows.size(); ++f)
        out.row({"firm", partition.rows.name(f), std::to_string(partition.row_label[static_cast<std::size_t>(f)])});
    for (int p = 0; p < partition.cols.size(); ++p)
        out.row({"product", partition.cols.name(p), std::to_string(partition.col_label[static_cast<std::size_t>(p)])});
    out.close();
}

std::string block_composition_report(const BlockPartition& partition, const HsMap& hs_map) {
    struct BlockInfo {
        int firms = 0;
        int products = 0;
        std::map<int, int> section_members;
    };
    std::map<int, BlockInfo> blocks;
    for (int f = 0; f < partition.rows.size(); ++f)
        ++blocks[partition.row_label[static_cast<std::size_t>(f)]].firms;
    for (int p = 0; p < partition.cols.size(); ++p) {
        auto& b = blocks[partition.col_label[static_cast<std::size_t>(p)]];
        ++b.products;
        const std::string& code = partition.cols.name(p);
        int section = code.size() == 4 ? hs_map.section_of_hs4(code)
                                       : (hs_map.try_resolve(code) ? hs_map.try_resolve(code)->section : -1);
        if (section > 0) ++b.section_members[section];
    }

    std::string report;
    report += "block composition (" + std::to_string(blocks.size()) + " blocks, Q = " +
              format_fixed(partition.modularity, 4) + ")\n";
    for (const auto& [label, info] : blocks) {
        report += "block " + std::to_string(label) + ": " + std::to_string(info.firms) + " firms, " +
                  std::to_string(info.products) + " products";
        std::vector<std::pair<int, int>> sections(info.section_members.begin(), info.section_members.end());
        std::sort(sections.begin(), sections.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::size_t shown = 0;
        for (const auto& [section, count] : sections) {
            if (shown++ == 3) break;
            report += shown == 1 ? "; top sections: " : ", ";
            report += std::to_string(section) + " (" +
                      format_fixed(100.0 * count / std::max(info.products, 1), 1) + "%)";
        }
        report += "\n";
    }
    return report;
}

} // namespace ecx
