#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "drsl/bn.hpp"
#include "drsl/error.hpp"

namespace drsl {

namespace {

using nlohmann::json;

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k)
        if (text[k] == '\n') ++line;
    return line;
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw DataError(fmt::format("{}: missing field '{}'", where, key));
    return obj.at(key);
}

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

std::string json_string(const std::string& s) { return json(s).dump(); }

}  // namespace

DiscreteBayesNet parse_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(fmt::format("network JSON parse error at line {}: {}", line_of(text, e.byte), e.what()));
    }
    if (!doc.is_object()) throw DataError("network JSON: top level must be an object");
    const auto& jnodes = field(doc, "nodes", "network");
    const auto& jparents = field(doc, "parents", "network");
    const auto& jcpts = field(doc, "cpts", "network");
    if (!jnodes.is_array()) throw DataError("network: 'nodes' must be an array");

    std::vector<Node> nodes;
    std::map<std::string, std::size_t> index;
    try {
        for (std::size_t v = 0; v < jnodes.size(); ++v) {
            const auto where = fmt::format("nodes[{}]", v);
            Node nd{field(jnodes[v], "name", where).get<std::string>(),
                    field(jnodes[v], "cardinality", where).get<int>()};
            if (!index.emplace(nd.name, v).second) throw DataError(fmt::format("{}: duplicate name '{}'", where, nd.name));
            nodes.push_back(std::move(nd));
        }
        std::vector<std::vector<std::size_t>> parents(nodes.size());
        std::vector<std::vector<std::vector<double>>> cpts(nodes.size());
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            const auto& name = nodes[v].name;
            if (jparents.contains(name)) {
                for (const auto& p : jparents.at(name)) {
                    const auto pn = p.get<std::string>();
                    auto it = index.find(pn);
                    if (it == index.end())
                        throw DataError(fmt::format("parents['{}']: unknown parent name '{}'", name, pn));
                    parents[v].push_back(it->second);
                }
            }
            if (!jcpts.contains(name)) throw DataError(fmt::format("cpts: missing table for node '{}'", name));
            cpts[v] = jcpts.at(name).get<std::vector<std::vector<double>>>();
        }
        for (const auto& [key, _] : jparents.items())
            if (!index.count(key)) throw DataError(fmt::format("parents: unknown node name '{}'", key));
        for (const auto& [key, _] : jcpts.items())
            if (!index.count(key)) throw DataError(fmt::format("cpts: unknown node name '{}'", key));
        return DiscreteBayesNet(std::move(nodes), std::move(parents), std::move(cpts));
    } catch (const json::exception& e) {
        throw DataError(fmt::format("network JSON: wrong field type: {}", e.what()));
    }
}

std::string network_to_json(const DiscreteBayesNet& net) {
    std::string out = "{\n \"nodes\": [\n";
    for (std::size_t v = 0; v < net.size(); ++v) {
        out += fmt::format("  {{\"name\": {}, \"cardinality\": {}}}{}\n", json_string(net.node(v).name),
                           net.node(v).cardinality, v + 1 < net.size() ? "," : "");
    }
    out += " ],\n \"parents\": {\n";
    for (std::size_t v = 0; v < net.size(); ++v) {
        out += fmt::format("  {}: [", json_string(net.node(v).name));
        const auto& pa = net.parents(v);
        for (std::size_t k = 0; k < pa.size(); ++k)
            out += (k ? ", " : "") + json_string(net.node(pa[k]).name);
        out += v + 1 < net.size() ? "],\n" : "]\n";
    }
    out += " },\n \"cpts\": {\n";
    for (std::size_t v = 0; v < net.size(); ++v) {
        out += fmt::format("  {}: [", json_string(net.node(v).name));
        const auto& t = net.cpt(v);
        for (std::size_t c = 0; c < t.size(); ++c) {
            out += c ? ", [" : "[";
            for (std::size_t k = 0; k < t[c].size(); ++k) out += (k ? ", " : "") + fmt_double(t[c][k]);
            out += "]";
        }
        out += v + 1 < net.size() ? "],\n" : "]\n";
    }
    out += " }\n}\n";
    return out;
}

DiscreteBayesNet load_network(const std::string& path) {
    try {
        return parse_network(read_file(path));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path, e.what()));
    }
}

void save_network(const DiscreteBayesNet& net, const std::string& path) { write_file(path, network_to_json(net)); }

Dataset parse_dataset(const std::string& text, const std::optional<std::vector<int>>& cardinalities) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> names;
    std::vector<int> values;
    bool have_header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (ch != '\r' && ch != ' ' && ch != '\t') {
                cur += ch;
            }
        }
        out.push_back(cur);
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (!have_header) {
            names = cells;
            for (const auto& nm : names)
                if (nm.empty()) throw DataError(fmt::format("dataset line {}: empty column name", lineno));
            have_header = true;
            continue;
        }
        if (cells.size() != names.size()) {
            throw DataError(
                fmt::format("dataset line {}: expected {} fields, found {}", lineno, names.size(), cells.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto& c = cells[j];
            char* end = nullptr;
            errno = 0;
            long v = std::strtol(c.c_str(), &end, 10);
            if (c.empty() || *end != '\0' || errno == ERANGE || v < 0 || v > 1'000'000) {
                throw DataError(fmt::format("dataset line {} column '{}': invalid category index '{}'", lineno,
                                            names[j], c));
            }
            values.push_back(static_cast<int>(v));
        }
    }
    if (!have_header) throw DataError("dataset: missing header line");
    if (values.empty()) throw DataError("dataset: no rows");
    std::vector<int> cards;
    if (cardinalities) {
        cards = *cardinalities;
        if (cards.size() != names.size())
            throw DataError(fmt::format("dataset has {} columns but {} cardinalities were supplied", names.size(),
                                        cards.size()));
    } else {
        cards.assign(names.size(), 2);
        for (std::size_t k = 0; k < values.size(); ++k)
            cards[k % names.size()] = std::max(cards[k % names.size()], values[k] + 1);
    }
    return Dataset(std::move(names), std::move(cards), std::move(values));
}

std::string dataset_to_csv(const Dataset& data, const std::string& comment) {
    std::string out;
    if (!comment.empty()) {
        std::istringstream in(comment);
        std::string line;
        while (std::getline(in, line)) out += "# " + line + "\n";
    }
    for (std::size_t j = 0; j < data.cols(); ++j) out += (j ? "," : "") + data.names()[j];
    out += '\n';
    out.reserve(out.size() + data.values().size() * 2);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (j) out += ',';
            out += std::to_string(data(i, j));
        }
        out += '\n';
    }
    return out;
}

Dataset load_dataset(const std::string& path, const std::optional<std::vector<int>>& cardinalities) {
    try {
        return parse_dataset(read_file(path), cardinalities);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path, e.what()));
    }
}

void save_dataset(const Dataset& data, const std::string& path, const std::string& comment) {
    write_file(path, dataset_to_csv(data, comment));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}': {}", path, std::strerror(errno)));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}': {}", path, std::strerror(errno)));
    out << contents;
    if (!out) throw DataError(fmt::format("write to '{}' failed", path));
}

}  // namespace drsl
