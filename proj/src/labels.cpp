#include "logicere/labels.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace logicere {

namespace {

constexpr std::array<std::string_view, kNumLabels> kNames = {
    "BEFORE", "AFTER", "EQUAL", "VAGUE", "PARENT-CHILD", "CHILD-PARENT", "COREF", "NOREL",
};

// Transcription of the induction table for conjunctive constraints. Only cells that
// carry a constraint are listed; every other cell is "no constraint".
constexpr std::string_view kDefaultTableJson = R"({
  "version": "induction-table-v1",
  "entries": {
    "BEFORE,BEFORE": ["BEFORE"],
    "BEFORE,EQUAL": ["BEFORE"],
    "EQUAL,BEFORE": ["BEFORE"],
    "AFTER,AFTER": ["AFTER"],
    "AFTER,EQUAL": ["AFTER"],
    "EQUAL,AFTER": ["AFTER"],
    "EQUAL,EQUAL": ["EQUAL", "COREF"],
    "PARENT-CHILD,PARENT-CHILD": ["PARENT-CHILD"],
    "CHILD-PARENT,CHILD-PARENT": ["CHILD-PARENT"],
    "PARENT-CHILD,BEFORE": ["PARENT-CHILD"],
    "PARENT-CHILD,AFTER": ["PARENT-CHILD"],
    "PARENT-CHILD,EQUAL": ["PARENT-CHILD"],
    "BEFORE,CHILD-PARENT": ["CHILD-PARENT"],
    "AFTER,CHILD-PARENT": ["CHILD-PARENT"],
    "EQUAL,CHILD-PARENT": ["CHILD-PARENT"],
    "COREF,BEFORE": ["BEFORE"],
    "COREF,AFTER": ["AFTER"],
    "COREF,EQUAL": ["EQUAL"],
    "COREF,VAGUE": ["VAGUE"],
    "COREF,PARENT-CHILD": ["PARENT-CHILD"],
    "COREF,CHILD-PARENT": ["CHILD-PARENT"],
    "COREF,COREF": ["COREF"],
    "COREF,NOREL": ["NOREL"],
    "BEFORE,COREF": ["BEFORE"],
    "AFTER,COREF": ["AFTER"],
    "EQUAL,COREF": ["EQUAL"],
    "VAGUE,COREF": ["VAGUE"],
    "PARENT-CHILD,COREF": ["PARENT-CHILD"],
    "CHILD-PARENT,COREF": ["CHILD-PARENT"],
    "NOREL,COREF": ["NOREL"]
  }
}
)";

std::string set_to_string(LabelSet s) {
    std::string out = "{";
    bool first = true;
    for (auto l : s.labels()) {
        if (!first) out += ",";
        out += label_name(l);
        first = false;
    }
    return out + "}";
}

}  // namespace

std::string_view label_name(RelationLabel l) { return kNames[index_of(l)]; }

std::optional<RelationLabel> try_parse_label(std::string_view name) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        if (kNames[i] == name) return kAllLabels[i];
    }
    return std::nullopt;
}

RelationLabel parse_label(std::string_view name) {
    if (auto l = try_parse_label(name)) return *l;
    throw std::invalid_argument("unknown relation label '" + std::string(name) + "'");
}

std::vector<RelationLabel> LabelSet::labels() const {
    std::vector<RelationLabel> out;
    for (auto l : kAllLabels) {
        if (contains(l)) out.push_back(l);
    }
    return out;
}

std::string_view mode_name(LabelMode m) {
    switch (m) {
        case LabelMode::SplitTre: return "SPLIT_TRE";
        case LabelMode::SplitSre: return "SPLIT_SRE";
        case LabelMode::Joint: return "JOINT";
    }
    return "JOINT";
}

LabelMode parse_mode(std::string_view name) {
    if (name == "SPLIT_TRE") return LabelMode::SplitTre;
    if (name == "SPLIT_SRE") return LabelMode::SplitSre;
    if (name == "JOINT") return LabelMode::Joint;
    throw std::invalid_argument("unknown label mode '" + std::string(name) + "'");
}

LabelSpace LabelSpace::make(LabelMode mode) {
    LabelSpace s;
    s.mode = mode;
    LabelSet members;
    switch (mode) {
        case LabelMode::SplitTre: members = LabelSet::temporal(); break;
        case LabelMode::SplitSre: members = LabelSet::subevent(); break;
        case LabelMode::Joint: members = LabelSet::all(); break;
    }
    s.labels = members.labels();
    // Reciprocal and reflexive labels alike take part in the symmetry constraint.
    s.symmetric_set = members;
    s.positive_set = members;
    s.positive_set.erase(RelationLabel::Vague);
    s.positive_set.erase(RelationLabel::NoRel);
    return s;
}

LabelSet LabelSpace::members() const {
    LabelSet s;
    for (auto l : labels) s.insert(l);
    return s;
}

int LabelSpace::position(RelationLabel l) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == l) return static_cast<int>(i);
    }
    return -1;
}

std::string_view provenance_name(EntryProvenance p) {
    switch (p) {
        case EntryProvenance::PaperFigure: return "paper-figure";
        case EntryProvenance::OracleDerived: return "oracle-derived";
        case EntryProvenance::Unconstrained: return "unconstrained";
    }
    return "unconstrained";
}

void ConjunctionTable::set(RelationLabel r1, RelationLabel r2, LabelSet deduced,
                           EntryProvenance p) {
    entries_[index_of(r1)][index_of(r2)] = Entry{deduced, p};
}

void ConjunctionTable::clear(RelationLabel r1, RelationLabel r2) {
    entries_[index_of(r1)][index_of(r2)].reset();
}

EntryProvenance ConjunctionTable::provenance(RelationLabel r1, RelationLabel r2) const {
    const auto& e = entry(r1, r2);
    return e ? e->provenance : EntryProvenance::Unconstrained;
}

bool ConjunctionTable::operator==(const ConjunctionTable& o) const {
    return entries_ == o.entries_;
}

LabelSet deduction_set(const ConjunctionTable& table, RelationLabel r1, RelationLabel r2,
                       LabelSet space) {
    const auto& e = table.entry(r1, r2);
    if (!e) return space;
    return e->deduced & space;
}

bool is_constrained(const ConjunctionTable& table, RelationLabel r1, RelationLabel r2,
                    LabelSet space) {
    if (!space.contains(r1) || !space.contains(r2)) return false;
    return deduction_set(table, r1, r2, space) != space;
}

ConjunctionTable derive_temporal_table() {
    // Time points on a small grid are enough to realize every order type of a triple.
    constexpr int kGrid = 3;
    auto relate = [](int x, int y) {
        if (x < y) return RelationLabel::Before;
        if (x > y) return RelationLabel::After;
        return RelationLabel::Equal;
    };
    std::array<std::array<LabelSet, 3>, 3> realized{};
    for (int a = 0; a < kGrid; ++a) {
        for (int b = 0; b < kGrid; ++b) {
            for (int c = 0; c < kGrid; ++c) {
                auto r1 = relate(a, b);
                auto r2 = relate(b, c);
                realized[index_of(r1)][index_of(r2)].insert(relate(a, c));
            }
        }
    }
    const LabelSet ordered{RelationLabel::Before, RelationLabel::After, RelationLabel::Equal};
    ConjunctionTable table;
    table.version = "point-oracle";
    for (auto r1 : ordered.labels()) {
        for (auto r2 : ordered.labels()) {
            LabelSet de = realized[index_of(r1)][index_of(r2)];
            if (de == ordered) continue;
            table.set(r1, r2, de, EntryProvenance::OracleDerived);
        }
    }
    return table;
}

TableLoadResult parse_table(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("table: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("table: top level must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "entries" && key != "version" && key != "provenance") {
            throw std::invalid_argument("table: unknown field '" + key + "'");
        }
    }
    if (!doc.contains("entries") || !doc["entries"].is_object()) {
        throw std::invalid_argument("table: 'entries' must be an object");
    }

    TableLoadResult result;
    const ConjunctionTable oracle = derive_temporal_table();
    result.table = oracle;
    result.table.version = "unversioned";
    if (doc.contains("version")) {
        if (!doc["version"].is_string()) throw std::invalid_argument("table: 'version' must be a string");
        result.table.version = doc["version"].get<std::string>();
    }

    for (const auto& [key, value] : doc["entries"].items()) {
        auto comma = key.find(',');
        if (comma == std::string::npos || key.find(',', comma + 1) != std::string::npos) {
            throw std::invalid_argument("table: malformed key '" + key + "'");
        }
        auto r1 = try_parse_label(std::string_view(key).substr(0, comma));
        auto r2 = try_parse_label(std::string_view(key).substr(comma + 1));
        if (!r1 || !r2) throw std::invalid_argument("table: unknown label in key '" + key + "'");
        if (!value.is_array() || value.empty()) {
            throw std::invalid_argument("table: De set for '" + key + "' must be a non-empty array");
        }
        LabelSet de;
        for (const auto& item : value) {
            if (!item.is_string()) {
                throw std::invalid_argument("table: De set for '" + key + "' must hold label names");
            }
            auto l = try_parse_label(item.get<std::string>());
            if (!l) {
                throw std::invalid_argument("table: unknown label '" + item.get<std::string>() +
                                            "' in '" + key + "'");
            }
            de.insert(*l);
        }

        // The oracle only speaks about the ordered temporal labels; compare on those.
        const LabelSet ordered{RelationLabel::Before, RelationLabel::After, RelationLabel::Equal};
        const bool oracle_block = ordered.contains(*r1) && ordered.contains(*r2);
        const LabelSet oracle_de = deduction_set(oracle, *r1, *r2, ordered);
        if (oracle_block && oracle_de != (de & ordered)) {
            result.warnings.push_back("entry " + key + " = " + set_to_string(de) +
                                      " disagrees with interval oracle " +
                                      set_to_string(oracle_de) + "; file entry kept");
        }
        result.table.set(*r1, *r2, de, EntryProvenance::PaperFigure);
    }
    return result;
}

TableLoadResult load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_table(ss.str());
}

std::string_view default_table_json() { return kDefaultTableJson; }

const ConjunctionTable& default_table() {
    static const ConjunctionTable table = parse_table(kDefaultTableJson).table;
    return table;
}

std::string table_to_json(const ConjunctionTable& table) {
    nlohmann::ordered_json out;
    out["version"] = table.version;
    out["entries"] = nlohmann::ordered_json::object();
    out["provenance"] = nlohmann::ordered_json::object();
    for (auto r1 : kAllLabels) {
        for (auto r2 : kAllLabels) {
            const auto& e = table.entry(r1, r2);
            if (!e) continue;
            std::string key = std::string(label_name(r1)) + "," + std::string(label_name(r2));
            auto arr = nlohmann::ordered_json::array();
            for (auto l : e->deduced.labels()) arr.push_back(std::string(label_name(l)));
            out["entries"][key] = arr;
            out["provenance"][key] = std::string(provenance_name(e->provenance));
        }
    }
    return out.dump(2) + "\n";
}

}  // namespace logicere
