#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tgp/error.hpp"
#include "tgp/graph.hpp"

namespace tgp {

/// Dataset descriptor: `name`, `bipartite` and `feature_count` keys.
struct DatasetFormat {
    std::string name = "dataset";
    bool bipartite = false;
    /// -1 infers the count from the first data row.
    int feature_count = -1;
};

/// Reads an INI-style descriptor such as
///
///     name = wikipedia
///     bipartite = true
///     feature_count = 172
inline DatasetFormat read_descriptor(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(std::string("descriptor: ") + e.what());
    }
    DatasetFormat fmt;
    try {
        fmt.name = tree.get<std::string>("name", fmt.name);
        if (tree.count("bipartite")) fmt.bipartite = tree.get<bool>("bipartite");
        if (tree.count("feature_count")) fmt.feature_count = tree.get<int>("feature_count");
    } catch (const boost::property_tree::ptree_error& e) {
        throw InputError(std::string("descriptor: ") + e.what());
    }
    return fmt;
}

inline DatasetFormat read_descriptor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open descriptor " + path);
    return read_descriptor(in);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
    field = trim(field);
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

inline void append_double(std::string& out, double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

} // namespace detail

/// Parses `user_id,item_id,timestamp,state_label,f1,...,fk` with a header row.
inline TemporalGraph parse_edge_stream(std::istream& in, const DatasetFormat& format) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw InputError("empty edge stream");

    auto table = std::make_shared<NodeTable>(format.bipartite);
    std::vector<TemporalEdge> edges;
    int feature_count = format.feature_count;
    auto fail = [&](const std::string& why) {
        throw InputError("line " + std::to_string(line_no) + ": " + why);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_commas(line);
        if (fields.size() < 4) fail("expected at least 4 columns");
        if (feature_count < 0) feature_count = static_cast<int>(fields.size()) - 4;
        if (fields.size() != static_cast<std::size_t>(feature_count) + 4)
            fail("expected " + std::to_string(feature_count + 4) + " columns, found " +
                 std::to_string(fields.size()));

        std::int64_t src = 0, dst = 0, label = 0;
        double ts = 0.0;
        if (!detail::parse_number(fields[0], src) || src < 0) fail("bad source id");
        if (!detail::parse_number(fields[1], dst) || dst < 0) fail("bad target id");
        if (!detail::parse_number(fields[2], ts) || !std::isfinite(ts) || ts < 0.0) fail("bad timestamp");
        if (!detail::parse_number(fields[3], label)) {
            double as_real = 0.0;
            if (!detail::parse_number(fields[3], as_real) || as_real != std::floor(as_real)) fail("bad label");
            label = static_cast<std::int64_t>(as_real);
        }
        TemporalEdge e;
        e.source = table->intern(src, Side::Source);
        e.target = table->intern(dst, Side::Target);
        if (e.source == e.target) fail("self-loop");
        e.timestamp = ts;
        e.label = label;
        e.features.resize(static_cast<std::size_t>(feature_count));
        for (int k = 0; k < feature_count; ++k)
            if (!detail::parse_number(fields[4 + static_cast<std::size_t>(k)], e.features[static_cast<std::size_t>(k)]))
                fail("bad feature " + std::to_string(k));
        edges.push_back(std::move(e));
    }
    if (edges.empty()) throw InputError("edge stream has a header but no rows");

    TemporalGraph graph(std::move(edges), std::move(table), static_cast<std::size_t>(std::max(feature_count, 0)));
    if (graph.was_resorted()) warn("timestamps were not monotone; edges re-sorted by time");
    return graph;
}

inline TemporalGraph parse_edge_stream(std::string_view text, const DatasetFormat& format) {
    std::istringstream in{std::string(text)};
    return parse_edge_stream(in, format);
}

inline TemporalGraph load_edge_stream(const std::string& path, const DatasetFormat& format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open edge stream " + path);
    return parse_edge_stream(in, format);
}

/// Writes the stream in the same format it was read, using original ids.
/// Reals use the shortest representation that round-trips exactly.
inline void write_edge_stream(std::ostream& out, const TemporalGraph& graph) {
    std::string buf = "user_id,item_id,timestamp,state_label";
    for (std::size_t k = 0; k < graph.feature_count(); ++k) buf += ",f" + std::to_string(k);
    buf += '\n';
    const auto& nodes = graph.nodes();
    for (const auto& e : graph.edges()) {
        buf += std::to_string(nodes.original(e.source));
        buf += ',';
        buf += std::to_string(nodes.original(e.target));
        buf += ',';
        detail::append_double(buf, e.timestamp);
        buf += ',';
        buf += std::to_string(e.label);
        for (std::size_t k = 0; k < graph.feature_count(); ++k) {
            buf += ',';
            detail::append_double(buf, k < e.features.size() ? e.features[k] : 0.0);
        }
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
}

inline std::string serialize_edge_stream(const TemporalGraph& graph) {
    std::ostringstream out;
    write_edge_stream(out, graph);
    return out.str();
}

} // namespace tgp
