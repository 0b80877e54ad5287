#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logicere {

enum class RelationLabel : std::uint8_t {
    Before = 0,
    After,
    Equal,
    Vague,
    ParentChild,
    ChildParent,
    Coref,
    NoRel,
};

inline constexpr std::size_t kNumLabels = 8;

inline constexpr std::array<RelationLabel, kNumLabels> kAllLabels = {
    RelationLabel::Before,      RelationLabel::After,       RelationLabel::Equal,
    RelationLabel::Vague,       RelationLabel::ParentChild, RelationLabel::ChildParent,
    RelationLabel::Coref,       RelationLabel::NoRel,
};

constexpr std::size_t index_of(RelationLabel l) { return static_cast<std::size_t>(l); }

std::string_view label_name(RelationLabel l);
/// Throws std::invalid_argument on an unknown name.
RelationLabel parse_label(std::string_view name);
std::optional<RelationLabel> try_parse_label(std::string_view name);

/// Flips the argument order of a relation: BEFORE<->AFTER, PARENT-CHILD<->CHILD-PARENT,
/// everything else is its own reverse.
constexpr RelationLabel reverse(RelationLabel l) {
    switch (l) {
        case RelationLabel::Before: return RelationLabel::After;
        case RelationLabel::After: return RelationLabel::Before;
        case RelationLabel::ParentChild: return RelationLabel::ChildParent;
        case RelationLabel::ChildParent: return RelationLabel::ParentChild;
        default: return l;
    }
}

constexpr bool is_temporal(RelationLabel l) { return index_of(l) < 4; }

/// Bitset over the eight relation labels.
class LabelSet {
   public:
    constexpr LabelSet() = default;
    constexpr LabelSet(std::initializer_list<RelationLabel> ls) {
        for (auto l : ls) insert(l);
    }
    static constexpr LabelSet from_bits(std::uint8_t b) {
        LabelSet s;
        s.bits_ = b;
        return s;
    }
    static constexpr LabelSet all() { return from_bits(0xFF); }
    static constexpr LabelSet temporal() { return from_bits(0x0F); }
    static constexpr LabelSet subevent() { return from_bits(0xF0); }

    constexpr void insert(RelationLabel l) { bits_ |= bit(l); }
    constexpr void erase(RelationLabel l) { bits_ &= static_cast<std::uint8_t>(~bit(l)); }
    constexpr bool contains(RelationLabel l) const { return (bits_ & bit(l)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }
    int size() const { return __builtin_popcount(bits_); }

    constexpr LabelSet operator&(LabelSet o) const { return from_bits(bits_ & o.bits_); }
    constexpr LabelSet operator|(LabelSet o) const { return from_bits(bits_ | o.bits_); }
    constexpr bool operator==(const LabelSet&) const = default;
    constexpr bool subset_of(LabelSet o) const { return (bits_ & ~o.bits_) == 0; }

    std::vector<RelationLabel> labels() const;

   private:
    static constexpr std::uint8_t bit(RelationLabel l) {
        return static_cast<std::uint8_t>(1u << index_of(l));
    }
    std::uint8_t bits_ = 0;
};

enum class LabelMode { SplitTre, SplitSre, Joint };

std::string_view mode_name(LabelMode m);
LabelMode parse_mode(std::string_view name);

/// The labels a model predicts over, in classifier output order, plus the subsets
/// that feed the symmetry loss and the micro-averaged metrics.
struct LabelSpace {
    LabelMode mode = LabelMode::Joint;
    std::vector<RelationLabel> labels;
    LabelSet symmetric_set;
    LabelSet positive_set;

    static LabelSpace make(LabelMode mode);

    std::size_t size() const { return labels.size(); }
    LabelSet members() const;
    bool contains(RelationLabel l) const { return members().contains(l); }
    /// Position of `l` in `labels`, or -1.
    int position(RelationLabel l) const;
};

enum class EntryProvenance { PaperFigure, OracleDerived, Unconstrained };

std::string_view provenance_name(EntryProvenance p);

/// Deduction sets De(r1, r2). Absent entries are unconstrained.
class ConjunctionTable {
   public:
    struct Entry {
        LabelSet deduced;
        EntryProvenance provenance = EntryProvenance::Unconstrained;
    };

    void set(RelationLabel r1, RelationLabel r2, LabelSet deduced, EntryProvenance p);
    void clear(RelationLabel r1, RelationLabel r2);
    const std::optional<Entry>& entry(RelationLabel r1, RelationLabel r2) const {
        return entries_[index_of(r1)][index_of(r2)];
    }
    EntryProvenance provenance(RelationLabel r1, RelationLabel r2) const;

    std::string version = "unversioned";

    bool operator==(const ConjunctionTable&) const;

   private:
    std::array<std::array<std::optional<Entry>, kNumLabels>, kNumLabels> entries_{};
};

inline bool operator==(const ConjunctionTable::Entry& a, const ConjunctionTable::Entry& b) {
    return a.deduced == b.deduced && a.provenance == b.provenance;
}

/// De(r1, r2) restricted to `space`; the whole space when the entry is absent.
LabelSet deduction_set(const ConjunctionTable& table, RelationLabel r1, RelationLabel r2,
                       LabelSet space = LabelSet::all());

/// True when De(r1, r2) ∩ space is a strict subset of `space`.
bool is_constrained(const ConjunctionTable& table, RelationLabel r1, RelationLabel r2,
                    LabelSet space = LabelSet::all());

/// Composition table over BEFORE/AFTER/EQUAL obtained by enumerating time-point
/// triples. Entries where every temporal outcome is realizable are left absent.
ConjunctionTable derive_temporal_table();

struct TableLoadResult {
    ConjunctionTable table;
    std::vector<std::string> warnings;
};

/// Parses table JSON text and merges it over the point-oracle table. File entries win;
/// disagreements with the oracle are reported as warnings.
TableLoadResult parse_table(std::string_view json_text);
TableLoadResult load_table(const std::filesystem::path& path);

/// The shipped transcription of the induction table, merged over the oracle.
const ConjunctionTable& default_table();
std::string_view default_table_json();

/// Serializes the table including provenance tags.
std::string table_to_json(const ConjunctionTable& table);

}  // namespace logicere
