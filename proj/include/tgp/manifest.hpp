#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/sampler.hpp"
#include "tgp/sparsify.hpp"

namespace tgp {

using ojson = nlohmann::ordered_json;

/// Removal record. Node ids are the dataset's original ids.
struct ManifestRemoval {
    std::int64_t source = 0;
    std::int64_t target = 0;
    Timestamp timestamp = 0.0;
    double score = 0.0;
    std::size_t rank = 0;
    std::size_t index = 0;
};

struct ManifestInsertion {
    std::int64_t source = 0;
    std::int64_t target = 0;
    Timestamp timestamp = 0.0;
    /// Rank of the compensated removal; empty for baselines that only add.
    std::optional<std::size_t> compensates;
    std::size_t round = 0;
    bool relaxed = false;
};

/// One run's record of E' and E~, sufficient to audit without the pipeline.
/// Serialized as JSON lines: a `meta` record, then `remove` and `insert` records.
struct Manifest {
    ojson meta = ojson::object();
    std::vector<ManifestRemoval> removals;
    std::vector<ManifestInsertion> insertions;

    std::string strategy() const { return meta.value("strategy", std::string()); }

    std::optional<std::size_t> budget() const {
        if (meta.contains("budget")) return meta["budget"].get<std::size_t>();
        return std::nullopt;
    }
};

inline Manifest make_manifest(const TemporalGraph& train, const RemovalPlan* removal, const InsertionPlan* insertion,
                              ojson meta = ojson::object()) {
    Manifest m;
    m.meta = std::move(meta);
    const auto& nodes = train.nodes();
    if (removal) {
        for (const auto& r : removal->removed) {
            const auto& e = train.edge(r.index);
            m.removals.push_back({nodes.original(e.source), nodes.original(e.target), e.timestamp, r.score, r.rank, r.index});
        }
    }
    if (insertion) {
        for (const auto& ins : insertion->inserted) {
            ManifestInsertion rec{nodes.original(ins.source), nodes.original(ins.target), ins.timestamp, std::nullopt,
                                  ins.round, ins.relaxed};
            if (ins.compensates != kNoRemoval) rec.compensates = ins.compensates;
            m.insertions.push_back(rec);
        }
    }
    return m;
}

inline void write_manifest(std::ostream& out, const Manifest& m) {
    const auto tag = m.strategy();
    ojson meta = {{"op", "meta"}};
    for (const auto& [k, v] : m.meta.items()) meta[k] = v;
    out << meta.dump() << '\n';
    for (const auto& r : m.removals) {
        ojson j = {{"op", "remove"},   {"source", r.source}, {"target", r.target}, {"timestamp", r.timestamp},
                   {"score", r.score}, {"rank", r.rank},     {"index", r.index},   {"strategy", tag}};
        out << j.dump() << '\n';
    }
    for (const auto& ins : m.insertions) {
        ojson j = {{"op", "insert"}, {"source", ins.source}, {"target", ins.target}, {"timestamp", ins.timestamp}};
        j["compensates"] = ins.compensates ? ojson(*ins.compensates) : ojson(nullptr);
        j["round"] = ins.round;
        j["recovery"] = ins.round > 0;
        j["relaxed"] = ins.relaxed;
        j["strategy"] = tag;
        out << j.dump() << '\n';
    }
}

inline std::string serialize_manifest(const Manifest& m) {
    std::ostringstream out;
    write_manifest(out, m);
    return out.str();
}

inline Manifest read_manifest(std::istream& in) {
    Manifest m;
    std::string line;
    std::size_t line_no = 0;
    bool saw_meta = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = "manifest line " + std::to_string(line_no) + ": ";
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + e.what());
        }
        try {
            const auto op = j.at("op").get<std::string>();
            if (op == "meta") {
                if (saw_meta) throw InputError(where + "second meta record");
                saw_meta = true;
                j.erase("op");
                m.meta = std::move(j);
            } else if (op == "remove") {
                m.removals.push_back({j.at("source").get<std::int64_t>(), j.at("target").get<std::int64_t>(),
                                      j.at("timestamp").get<double>(), j.value("score", 0.0),
                                      j.value("rank", std::size_t{0}), j.value("index", std::size_t{0})});
            } else if (op == "insert") {
                ManifestInsertion ins;
                ins.source = j.at("source").get<std::int64_t>();
                ins.target = j.at("target").get<std::int64_t>();
                ins.timestamp = j.at("timestamp").get<double>();
                if (j.contains("compensates") && !j["compensates"].is_null())
                    ins.compensates = j["compensates"].get<std::size_t>();
                ins.round = j.value("round", std::size_t{0});
                ins.relaxed = j.value("relaxed", false);
                m.insertions.push_back(ins);
            } else {
                throw InputError(where + "unknown op '" + op + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + e.what());
        }
    }
    return m;
}

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path);
    return read_manifest(in);
}

} // namespace tgp
