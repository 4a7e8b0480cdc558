#pragma once

#include "tsnbound/curves.hpp"
#include "tsnbound/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <map>
#include <string>
#include <vector>

namespace tsnbound::model {

enum class TrafficClass { A, B };
enum class Regulator { LRQ, LB };

const char* to_string(TrafficClass c);
const char* to_string(Regulator r);
TrafficClass traffic_class_from_string(const std::string& s);
Regulator regulator_from_string(const std::string& s);

struct Node {
    std::string id;
    bool is_host = false;
};

struct CbsSlopes {
    Rational idle_slope;  // I > 0, bits/s
    Rational send_slope;  // S < 0, bits/s
};

struct LinkParams {
    Rational capacity;  // c_ij, bits/s
    Rational t_proc_min, t_proc_max;  // seconds
    Rational t_var_min, t_var_max;    // seconds
    Rational be_max_packet;           // L^E_ij, bits
    curves::TokenBucket cdt;          // (r_ij, b_ij)
    std::optional<CbsSlopes> cbs_a;
    std::optional<CbsSlopes> cbs_b;

    const std::optional<CbsSlopes>& cbs(TrafficClass c) const {
        return c == TrafficClass::A ? cbs_a : cbs_b;
    }
};

struct LinkDef {
    std::string from, to;
    LinkParams params;
};

struct FlowSpec {
    std::string id;
    TrafficClass cls = TrafficClass::A;
    Regulator regulator = Regulator::LRQ;
    Rational rate;        // r_f, bits/s
    Rational burst;       // b_f, bits (== max_packet for LRQ)
    Rational max_packet;  // L_f, bits
    Rational min_packet;  // M_f, bits
    std::vector<std::string> path;  // i_1 .. i_k, hosts at both ends

    /// psi_f of Theorem 2 / Lemma 1 worst case: L_f for LRQ, M_f for LB.
    const Rational& psi() const { return regulator == Regulator::LRQ ? max_packet : min_packet; }
};

struct Diagnostic {
    enum class Severity { Fatal, Warning, Notice };
    Severity severity;
    std::string message;
};

bool has_fatal(const std::vector<Diagnostic>& diags);

/// Per-link per-class quantities consumed by the bound formulas.
struct LinkAggregates {
    Rational b_tot;   // sum of bursts of class-x flows on the link
    Rational r_tot;   // sum of rates
    Rational l_x;     // max packet of the queried class (0 when absent)
    Rational l_a, l_b, l_e;
    Rational lbar_a;  // max(L^B, L^E)
    Rational lbar;    // max(L^A, L^B, L^E)
};

class NetworkSpec {
public:
    std::vector<Node> nodes;
    std::vector<LinkDef> links;
    std::vector<FlowSpec> flows;

    /// Rebuild lookup indexes; called by the loader and after mutation.
    void reindex();

    bool has_node(const std::string& id) const;
    const Node* find_node(const std::string& id) const;
    const LinkDef* find_link(const std::string& from, const std::string& to) const;
    const LinkDef& link_or_throw(const std::string& from, const std::string& to) const;
    const FlowSpec* find_flow(const std::string& id) const;
    int link_index(const std::string& from, const std::string& to) const;  // -1 when absent

    /// F^x_ij: class-x flows traversing link (i, j), in flow declaration order.
    std::vector<const FlowSpec*> flows_on_link(const std::string& i, const std::string& j,
                                               TrafficClass x) const;
    /// F^x_ijk: subset of F^x_ij continuing from j to k.
    std::vector<const FlowSpec*> flows_through(const std::string& i, const std::string& j,
                                               const std::string& k, TrafficClass x) const;
    LinkAggregates link_aggregates(const std::string& i, const std::string& j,
                                   TrafficClass x) const;

    /// Position of node `node` in the flow's path, -1 when absent.
    static int path_index(const FlowSpec& f, const std::string& node);

private:
    std::map<std::string, std::size_t> node_index_;
    std::map<std::pair<std::string, std::string>, std::size_t> link_index_;
    std::map<std::string, std::size_t> flow_index_;
};

struct LoadResult {
    NetworkSpec spec;
    std::vector<Diagnostic> diagnostics;  // load-time rewrites and notices
};

LoadResult load_spec(const nlohmann::json& j);
LoadResult load_spec_file(const std::string& path);
nlohmann::json to_json(const NetworkSpec& spec);

/// Structural and stability validation per the model invariants. Fatal
/// diagnostics make the spec unusable; warnings (stability) do not.
std::vector<Diagnostic> validate(const NetworkSpec& spec);

/// FNV-1a over the canonical JSON; used to tie traces to specs.
std::uint64_t spec_hash(const NetworkSpec& spec);

}  // namespace tsnbound::model
