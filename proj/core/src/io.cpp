#include "scopf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scopf/errors.hpp"

namespace scopf::io {

using json = nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min(byte, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points at the offending character
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw SyntaxError(msg, line, col);
    }
}

std::string where(const std::string& kind, const json& obj) {
    if (obj.is_object() && obj.contains("id")) return kind + " " + obj["id"].dump();
    if (obj.is_object() && obj.contains("label")) return kind + " " + obj["label"].dump();
    return kind;
}

double number(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) throw SemanticError(ctx + ": missing field '" + key + "'");
    const auto& v = obj[key];
    if (!v.is_number()) throw SemanticError(ctx + ": field '" + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& ctx) {
    if (!obj.contains(key)) return fallback;
    return number(obj, key, ctx);
}

int integer(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object() || !obj.contains(key)) throw SemanticError(ctx + ": missing field '" + key + "'");
    const auto& v = obj[key];
    if (!v.is_number_integer()) throw SemanticError(ctx + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

const json& array(const json& doc, const char* key, bool required = true) {
    static const json empty = json::array();
    if (!doc.contains(key)) {
        if (required) throw SemanticError(std::string("missing section '") + key + "'");
        return empty;
    }
    if (!doc[key].is_array()) throw SemanticError(std::string("section '") + key + "' must be an array");
    return doc[key];
}

Contingency parse_contingency(const json& c) {
    const auto ctx = where("contingency", c);
    if (!c.is_object()) throw SemanticError("contingency entries must be objects");
    if (!c.contains("label") || !c["label"].is_string()) throw SemanticError(ctx + ": missing field 'label'");
    if (!c.contains("kind") || !c["kind"].is_string()) throw SemanticError(ctx + ": missing field 'kind'");
    Contingency k;
    k.label = c["label"].get<std::string>();
    const auto kind = c["kind"].get<std::string>();
    if (kind == "generator") k.kind = OutageKind::Generator;
    else if (kind == "line") k.kind = OutageKind::Line;
    else throw SemanticError(ctx + ": kind must be 'generator' or 'line'");
    k.element = integer(c, "element", ctx);
    return k;
}

PenaltyTiers parse_tiers(const json& arr, double base, const std::string& ctx) {
    if (!arr.is_array() || arr.empty()) throw SemanticError(ctx + ": expected a nonempty array of tiers");
    PenaltyTiers t;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& tier = arr[i];
        const auto tctx = ctx + " tier " + std::to_string(i);
        double width = kInfinity;
        if (!tier.contains("width_mw")) throw SemanticError(tctx + ": missing field 'width_mw'");
        if (!tier["width_mw"].is_null()) width = number(tier, "width_mw", tctx) / base;
        t.tiers.push_back({width, number(tier, "price", tctx) * base});
    }
    return t;
}

std::vector<std::pair<std::string, std::vector<std::string>>> tokenize(std::string_view text) {
    std::vector<std::pair<std::string, std::vector<std::string>>> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) tok.push_back(t);
        if (!tok.empty()) lines.emplace_back(line, std::move(tok));
        pos = end + 1;
    }
    return lines;
}

double parse_double(const std::string& s, const std::string& ctx) {
    double x = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto r = std::from_chars(first, last, x);
    if (r.ec != std::errc() || r.ptr != last) throw FormatError(ctx + ": bad number '" + s + "'");
    return x;
}

int parse_int(const std::string& s, const std::string& ctx) {
    int x = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw FormatError(ctx + ": bad id '" + s + "'");
    return x;
}

void check_dimensions(const Network& net, const OperatingPoint& s) {
    const auto nb = net.bus_count(), ng = net.generator_count();
    if (s.v.size() != nb || s.theta.size() != nb || s.b.size() != nb || s.p.size() != ng || s.q.size() != ng)
        throw FormatError("state is not dimensioned to the network");
}

void write_sections(std::string& out, const Network& net, const OperatingPoint& s, const std::vector<bool>* online) {
    out += "BUS\n";
    for (Index n = 0; n < net.bus_count(); ++n) {
        out += std::to_string(net.buses()[n].id);
        for (double x : {s.v[n], s.theta[n], s.b[n]}) {
            out += ' ';
            out += format_double(x);
        }
        out += '\n';
    }
    out += "GENERATOR\n";
    for (Index g = 0; g < net.generator_count(); ++g) {
        const bool on = online == nullptr || (*online)[g];
        out += std::to_string(net.generators()[g].id);
        out += ' ';
        out += format_double(on ? s.p[g] : 0.0);
        out += ' ';
        out += format_double(on ? s.q[g] : 0.0);
        out += '\n';
    }
}

// Reads BUS and GENERATOR sections starting at lines[i]; advances i past them.
OperatingPoint read_sections(const Network& net, const std::vector<std::pair<std::string, std::vector<std::string>>>& lines,
                             std::size_t& i, const std::string& ctx) {
    const auto nb = net.bus_count(), ng = net.generator_count();
    OperatingPoint s{std::vector<double>(nb), std::vector<double>(nb), std::vector<double>(nb),
                     std::vector<double>(ng), std::vector<double>(ng)};
    std::vector<bool> seen_bus(nb, false), seen_gen(ng, false);

    if (i >= lines.size() || lines[i].second != std::vector<std::string>{"BUS"})
        throw FormatError(ctx + ": expected BUS section");
    ++i;
    for (; i < lines.size() && lines[i].second.size() == 4; ++i) {
        const auto& t = lines[i].second;
        const int id = parse_int(t[0], ctx);
        const Index n = net.bus_index(id);
        if (n == kNoIndex) throw FormatError(ctx + ": unknown bus " + t[0]);
        if (seen_bus[n]) throw FormatError(ctx + ": duplicate bus " + t[0]);
        seen_bus[n] = true;
        s.v[n] = parse_double(t[1], ctx);
        s.theta[n] = parse_double(t[2], ctx);
        s.b[n] = parse_double(t[3], ctx);
    }
    if (i >= lines.size() || lines[i].second != std::vector<std::string>{"GENERATOR"})
        throw FormatError(ctx + ": expected GENERATOR section");
    ++i;
    for (; i < lines.size() && lines[i].second.size() == 3 && lines[i].second[0] != "DELTA"; ++i) {
        const auto& t = lines[i].second;
        const int id = parse_int(t[0], ctx);
        const Index g = net.generator_index(id);
        if (g == kNoIndex) throw FormatError(ctx + ": unknown generator " + t[0]);
        if (seen_gen[g]) throw FormatError(ctx + ": duplicate generator " + t[0]);
        seen_gen[g] = true;
        s.p[g] = parse_double(t[1], ctx);
        s.q[g] = parse_double(t[2], ctx);
    }
    for (Index n = 0; n < nb; ++n)
        if (!seen_bus[n]) throw FormatError(ctx + ": missing bus " + std::to_string(net.buses()[n].id));
    for (Index g = 0; g < ng; ++g)
        if (!seen_gen[g]) throw FormatError(ctx + ": missing generator " + std::to_string(net.generators()[g].id));
    return s;
}

}  // namespace

Network parse_instance(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw SemanticError("instance must be an object");
    const double base = number(doc, "base_mva", "instance");
    if (!(base > 0.0)) throw SemanticError("instance: base_mva must be positive");

    NetworkData d;
    d.ref_bus = integer(doc, "reference_bus", "instance");
    for (const auto& b : array(doc, "buses")) {
        const auto ctx = where("bus", b);
        Bus bus;
        bus.id = integer(b, "id", ctx);
        bus.vmin = number(b, "v_min", ctx);
        bus.vmax = number(b, "v_max", ctx);
        bus.vmin_e = number_or(b, "v_min_e", bus.vmin, ctx);
        bus.vmax_e = number_or(b, "v_max_e", bus.vmax, ctx);
        bus.p_load = number_or(b, "p_load_mw", 0.0, ctx) / base;
        bus.q_load = number_or(b, "q_load_mvar", 0.0, ctx) / base;
        bus.b_min = number_or(b, "b_min_mvar", 0.0, ctx) / base;
        bus.b_max = number_or(b, "b_max_mvar", 0.0, ctx) / base;
        d.buses.push_back(bus);
    }
    for (const auto& g : array(doc, "generators")) {
        const auto ctx = where("generator", g);
        Generator gen;
        gen.id = integer(g, "id", ctx);
        gen.bus = integer(g, "bus", ctx);
        gen.p_min = number(g, "p_min_mw", ctx) / base;
        gen.p_max = number(g, "p_max_mw", ctx) / base;
        gen.q_min = number(g, "q_min_mvar", ctx) / base;
        gen.q_max = number(g, "q_max_mvar", ctx) / base;
        gen.droop = number_or(g, "droop_mw", 0.0, ctx) / base;
        if (!g.contains("cost") || !g["cost"].is_array() || g["cost"].empty())
            throw SemanticError(ctx + ": missing field 'cost'");
        std::vector<CostBreakpoint> bp;
        for (const auto& c : g["cost"]) bp.push_back({number(c, "p_mw", ctx) / base, number(c, "marginal_cost", ctx) * base});
        gen.cost = CostFunction(std::move(bp));
        if (!gen.cost.is_convex()) throw SemanticError(ctx + ": cost must be convex with increasing breakpoints");
        d.generators.push_back(std::move(gen));
    }
    for (const auto& l : array(doc, "lines")) {
        const auto ctx = where("line", l);
        Line line;
        line.id = integer(l, "id", ctx);
        line.origin = integer(l, "origin", ctx);
        line.destination = integer(l, "destination", ctx);
        line.g = number(l, "g_pu", ctx);
        line.b = number(l, "b_pu", ctx);
        line.b_ch = number_or(l, "b_ch_pu", 0.0, ctx);
        line.rating = number(l, "rating_mva", ctx) / base;
        line.rating_e = number_or(l, "rating_e_mva", line.rating * base, ctx) / base;
        d.lines.push_back(line);
    }
    for (const auto& c : array(doc, "contingencies", false)) d.contingencies.push_back(parse_contingency(c));

    if (doc.contains("penalty")) {
        const auto& p = doc["penalty"];
        if (!p.is_object()) throw SemanticError("penalty must be an object");
        if (p.contains("imbalance")) d.penalty.imbalance = parse_tiers(p["imbalance"], base, "penalty imbalance");
        if (p.contains("overload")) d.penalty.overload = parse_tiers(p["overload"], base, "penalty overload");
    }

    if (doc.contains("operating_point")) {
        const auto& op = doc["operating_point"];
        std::map<int, std::size_t> bus_pos, gen_pos;
        for (std::size_t i = 0; i < d.buses.size(); ++i) bus_pos[d.buses[i].id] = i;
        for (std::size_t i = 0; i < d.generators.size(); ++i) gen_pos[d.generators[i].id] = i;
        OperatingPoint x{std::vector<double>(d.buses.size(), 1.0), std::vector<double>(d.buses.size(), 0.0),
                         std::vector<double>(d.buses.size(), 0.0), std::vector<double>(d.generators.size(), 0.0),
                         std::vector<double>(d.generators.size(), 0.0)};
        for (const auto& b : array(op, "buses", false)) {
            const auto ctx = where("operating_point bus", b);
            const auto it = bus_pos.find(integer(b, "id", ctx));
            if (it == bus_pos.end()) throw SemanticError(ctx + ": dangling reference to bus");
            x.v[it->second] = number(b, "v", ctx);
            x.theta[it->second] = number_or(b, "theta", 0.0, ctx);
            x.b[it->second] = number_or(b, "b", 0.0, ctx);
        }
        for (const auto& g : array(op, "generators", false)) {
            const auto ctx = where("operating_point generator", g);
            const auto it = gen_pos.find(integer(g, "id", ctx));
            if (it == gen_pos.end()) throw SemanticError(ctx + ": dangling reference to generator");
            x.p[it->second] = number(g, "p", ctx);
            x.q[it->second] = number_or(g, "q", 0.0, ctx);
        }
        d.prior_point = std::move(x);
    }

    Network net(std::move(d));
    const auto problems = validate(net);
    if (!problems.empty()) {
        std::string msg = problems.front();
        for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
        throw SemanticError(msg);
    }
    return net;
}

std::vector<Contingency> parse_contingency_list(std::string_view text) {
    const json doc = parse_json(text);
    const json* arr = &doc;
    if (doc.is_object()) arr = &array(doc, "contingencies");
    if (!arr->is_array()) throw SemanticError("contingency list must be an array");
    std::vector<Contingency> out;
    for (const auto& c : *arr) out.push_back(parse_contingency(c));
    return out;
}

std::string write_instance(const Network& net, double base) {
    json doc;
    doc["base_mva"] = base;
    doc["reference_bus"] = net.ref_bus_id();
    doc["buses"] = json::array();
    for (const auto& b : net.buses())
        doc["buses"].push_back({{"id", b.id},
                                {"v_min", b.vmin},
                                {"v_max", b.vmax},
                                {"v_min_e", b.vmin_e},
                                {"v_max_e", b.vmax_e},
                                {"p_load_mw", b.p_load * base},
                                {"q_load_mvar", b.q_load * base},
                                {"b_min_mvar", b.b_min * base},
                                {"b_max_mvar", b.b_max * base}});
    doc["generators"] = json::array();
    for (const auto& g : net.generators()) {
        json cost = json::array();
        for (const auto& bp : g.cost.breakpoints())
            cost.push_back({{"p_mw", bp.p * base}, {"marginal_cost", bp.marginal_cost / base}});
        doc["generators"].push_back({{"id", g.id},
                                     {"bus", g.bus},
                                     {"p_min_mw", g.p_min * base},
                                     {"p_max_mw", g.p_max * base},
                                     {"q_min_mvar", g.q_min * base},
                                     {"q_max_mvar", g.q_max * base},
                                     {"droop_mw", g.droop * base},
                                     {"cost", cost}});
    }
    doc["lines"] = json::array();
    for (const auto& l : net.lines())
        doc["lines"].push_back({{"id", l.id},
                                {"origin", l.origin},
                                {"destination", l.destination},
                                {"g_pu", l.g},
                                {"b_pu", l.b},
                                {"b_ch_pu", l.b_ch},
                                {"rating_mva", l.rating * base},
                                {"rating_e_mva", l.rating_e * base}});
    doc["contingencies"] = json::array();
    for (const auto& k : net.contingencies())
        doc["contingencies"].push_back({{"label", k.label},
                                        {"kind", k.kind == OutageKind::Generator ? "generator" : "line"},
                                        {"element", k.element}});
    auto tiers = [base](const PenaltyTiers& t) {
        json arr = json::array();
        for (const auto& tier : t.tiers) {
            json w = std::isinf(tier.width) ? json(nullptr) : json(tier.width * base);
            arr.push_back({{"width_mw", w}, {"price", tier.price / base}});
        }
        return arr;
    };
    doc["penalty"] = {{"imbalance", tiers(net.penalty().imbalance)}, {"overload", tiers(net.penalty().overload)}};
    if (const auto& x = net.prior_point()) {
        json buses = json::array(), gens = json::array();
        for (Index n = 0; n < net.bus_count(); ++n)
            buses.push_back({{"id", net.buses()[n].id}, {"v", x->v[n]}, {"theta", x->theta[n]}, {"b", x->b[n]}});
        for (Index g = 0; g < net.generator_count(); ++g)
            gens.push_back({{"id", net.generators()[g].id}, {"p", x->p[g]}, {"q", x->q[g]}});
        doc["operating_point"] = {{"buses", buses}, {"generators", gens}};
    }
    return doc.dump(2) + "\n";
}

std::string format_double(double x) {
    if (x == 0.0) x = 0.0;  // no negative zero in files
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 16);
    return std::string(buf, r.ptr);
}

std::string write_base_solution(const Network& net, const BaseState& state) {
    check_dimensions(net, state);
    if (net.ref_bus() != kNoIndex && state.theta[net.ref_bus()] != 0.0)
        throw FormatError("reference bus angle must be zero");
    std::string out;
    write_sections(out, net, state, nullptr);
    return out;
}

BaseState read_base_solution(const Network& net, std::string_view text) {
    const auto lines = tokenize(text);
    std::size_t i = 0;
    auto s = read_sections(net, lines, i, "base solution");
    if (i != lines.size()) throw FormatError("base solution: unexpected line '" + lines[i].first + "'");
    return s;
}

std::string write_contingency_solutions(const Network& net, const std::vector<ContingencySolution>& blocks) {
    std::map<std::string, const Contingency*> by_label;
    for (const auto& k : net.contingencies()) by_label[k.label] = &k;
    std::string out;
    for (const auto& blk : blocks) {
        check_dimensions(net, blk.point);
        if (blk.label.empty() || blk.label.find_first_of(" \t\r\n") != std::string::npos)
            throw FormatError("contingency label must be a single nonempty token: '" + blk.label + "'");
        std::vector<bool> online(net.generator_count(), true);
        if (auto it = by_label.find(blk.label); it != by_label.end())
            online = post_contingency_sets(net, *it->second).generators;
        out += "CONTINGENCY " + blk.label + "\n";
        out += "DELTA " + format_double(blk.delta) + "\n";
        write_sections(out, net, blk.point, &online);
        out += "END\n";
    }
    return out;
}

std::vector<std::optional<ContingencySolution>> read_contingency_solutions(const Network& net, std::string_view text,
                                                                           bool strict) {
    const auto& ks = net.contingencies();
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < ks.size(); ++i) pos[ks[i].label] = i;
    std::vector<std::optional<ContingencySolution>> out(ks.size());

    const auto lines = tokenize(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        const auto& t = lines[i].second;
        if (t.size() != 2 || t[0] != "CONTINGENCY") throw FormatError("expected CONTINGENCY, got '" + lines[i].first + "'");
        const std::string label = t[1];
        const auto ctx = "contingency " + label;
        const auto it = pos.find(label);
        if (it == pos.end()) throw FormatError(ctx + ": unknown label");
        if (out[it->second]) throw FormatError(ctx + ": duplicate block");
        ++i;
        if (i >= lines.size() || lines[i].second.size() != 2 || lines[i].second[0] != "DELTA")
            throw FormatError(ctx + ": expected DELTA");
        ContingencySolution blk;
        blk.label = label;
        blk.delta = parse_double(lines[i].second[1], ctx);
        ++i;
        blk.point = read_sections(net, lines, i, ctx);
        if (i >= lines.size() || lines[i].second != std::vector<std::string>{"END"}) throw FormatError(ctx + ": expected END");
        ++i;
        out[it->second] = std::move(blk);
    }
    if (strict)
        for (std::size_t k = 0; k < ks.size(); ++k)
            if (!out[k]) throw FormatError("missing block for contingency " + ks[k].label);
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw FormatError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace scopf::io
