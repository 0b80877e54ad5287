#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logicere/corpus.hpp"

namespace logicere {

enum class NodeKind : std::uint8_t { Event, Pair };

/// Edge families of the logic constraint induced graph.
enum class EdgeType : std::uint8_t {
    EE = 0,  // coreferent events
    PP = 1,  // event pairs sharing an event
    EP = 2,  // event pair and one of its events
};
inline constexpr std::size_t kNumEdgeTypes = 3;

std::string_view edge_type_name(EdgeType t);

struct LcgNode {
    NodeKind kind = NodeKind::Event;
    // For Event nodes `first` is the event position; for Pair nodes (first, second) is the
    // ordered pair. Positions index Lcg::event_ids.
    std::size_t first = 0;
    std::size_t second = 0;
};

struct Neighbor {
    std::size_t node = 0;
    EdgeType type = EdgeType::PP;
    bool operator==(const Neighbor&) const = default;
};

struct LcgOptions {
    bool use_coref = true;
    bool use_ep_edges = true;
    /// Maximum token distance between the two triggers of a pair node.
    std::optional<std::size_t> max_pair_distance;
};

class Lcg {
   public:
    /// Event ids in node order (lexicographic).
    std::vector<std::string> event_ids;
    /// Events first, then ordered pairs in lexicographic order.
    std::vector<LcgNode> nodes;
    /// Per-node neighbors sorted by node index; every edge appears in both lists.
    std::vector<std::vector<Neighbor>> adjacency;
    /// Set when the document had fewer than two events.
    std::optional<std::string> warning;

    std::size_t num_events() const { return event_ids.size(); }
    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_pairs() const { return nodes.size() - event_ids.size(); }

    /// Node index of the pair (i, j) given event positions; nullopt when filtered out.
    std::optional<std::size_t> pair_node(std::size_t i, std::size_t j) const;
    std::optional<std::size_t> event_position(const std::string& id) const;

    /// Pair nodes as (node index, (i, j)), in node order.
    std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> candidate_pairs() const;

    /// Dense N x N matrix of edge type indices, -1 where there is no edge.
    std::vector<std::int8_t> edge_type_matrix() const;

   private:
    friend Lcg build_lcg(const Document&, const LcgOptions&);
    std::vector<std::size_t> pair_index_;  // i * k + j -> node index, or npos
};

Lcg build_lcg(const Document& doc, const LcgOptions& opts = {});

/// Throws std::out_of_range for an unknown node.
const std::vector<Neighbor>& neighbors(const Lcg& g, std::size_t node);

struct LcgStats {
    std::size_t event_nodes = 0;
    std::size_t pair_nodes = 0;
    // Undirected edge counts.
    std::size_t ee_edges = 0;
    std::size_t pp_edges = 0;
    std::size_t ep_edges = 0;
    bool operator==(const LcgStats&) const = default;
};

LcgStats lcg_stats(const Lcg& g);

/// Debug dump: {"event_ids", "nodes", "edges": {"EE": [[a,b],...], "PP": ..., "EP": ...}}.
std::string lcg_to_json(const Lcg& g);

}  // namespace logicere
