#include "gapgrad/mps.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace gapgrad {

namespace {

struct RowInfo {
    char sense = 'N';   // N, L, G, E
    int index = -1;     // constraint index, -1 for objective / free rows
    double rhs = 0.0;
    double range = std::numeric_limits<double>::quiet_NaN();
};

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

[[noreturn]] void fail(const std::string& origin, int line_no, const std::string& msg) {
    throw ParseError("MPS parse error at " + origin + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_number(const std::string& origin, int line_no, const std::string& tok) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) fail(origin, line_no, "bad numeric field '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        fail(origin, line_no, "bad numeric field '" + tok + "'");
    }
}

}  // namespace

MilpModel parse_mps(std::istream& in, const std::string& origin) {
    MilpModel model;
    std::unordered_map<std::string, RowInfo> rows;
    std::unordered_map<std::string, int> cols;
    std::string objective_row;
    bool in_integer_block = false;
    bool saw_any_section = false;
    bool saw_endata = false;

    enum class Section { none, name, objsense, rows, columns, rhs, ranges, bounds };
    Section section = Section::none;

    static const std::map<std::string, Section> kSections = {
        {"NAME", Section::name},       {"OBJSENSE", Section::objsense},
        {"ROWS", Section::rows},       {"COLUMNS", Section::columns},
        {"RHS", Section::rhs},         {"RANGES", Section::ranges},
        {"BOUNDS", Section::bounds},
    };

    auto var_index = [&](const std::string& name) {
        auto it = cols.find(name);
        if (it != cols.end()) return it->second;
        int j = model.add_variable(name, in_integer_block ? VarKind::integer : VarKind::continuous,
                                   0.0, kInfinity);
        cols.emplace(name, j);
        return j;
    };

    std::string line;
    int line_no = 0;
    // per-row coefficient accumulation (constraint rows only)
    std::vector<std::vector<std::pair<int, double>>> row_coeffs;
    std::vector<std::string> row_names_in_order;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '*') continue;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;

        bool header = !std::isspace(static_cast<unsigned char>(line[0]));
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        if (header) {
            const std::string& key = tokens[0];
            if (key == "ENDATA") {
                saw_endata = true;
                break;
            }
            auto it = kSections.find(key);
            if (it == kSections.end())
                throw ParseError("MPS file " + origin + ": unsupported section '" + key +
                                 "' at line " + std::to_string(line_no));
            section = it->second;
            saw_any_section = true;
            if (section == Section::name && tokens.size() > 1) model.name = tokens[1];
            if (section == Section::objsense && tokens.size() > 1)
                model.base_objective_maximize = (tokens[1] == "MAX" || tokens[1] == "MAXIMIZE");
            continue;
        }

        switch (section) {
            case Section::objsense: {
                model.base_objective_maximize = (tokens[0] == "MAX" || tokens[0] == "MAXIMIZE");
                break;
            }
            case Section::rows: {
                if (tokens.size() != 2) fail(origin, line_no, "ROWS line needs '<sense> <name>'");
                char sense = static_cast<char>(std::toupper(static_cast<unsigned char>(tokens[0][0])));
                if (tokens[0].size() != 1 || (sense != 'N' && sense != 'L' && sense != 'G' && sense != 'E'))
                    fail(origin, line_no, "unknown row sense '" + tokens[0] + "'");
                if (rows.count(tokens[1])) fail(origin, line_no, "duplicate row '" + tokens[1] + "'");
                RowInfo info;
                info.sense = sense;
                if (sense == 'N') {
                    if (objective_row.empty()) objective_row = tokens[1];
                } else {
                    info.index = static_cast<int>(row_coeffs.size());
                    row_coeffs.emplace_back();
                    row_names_in_order.push_back(tokens[1]);
                }
                rows.emplace(tokens[1], info);
                break;
            }
            case Section::columns: {
                if (tokens.size() >= 3 && tokens[1] == "'MARKER'") {
                    const std::string& kind = tokens.back();
                    if (kind == "'INTORG'")
                        in_integer_block = true;
                    else if (kind == "'INTEND'")
                        in_integer_block = false;
                    else
                        fail(origin, line_no, "unknown marker '" + kind + "'");
                    break;
                }
                if (tokens.size() != 3 && tokens.size() != 5)
                    fail(origin, line_no, "COLUMNS line needs '<col> <row> <val> [<row> <val>]'");
                int j = var_index(tokens[0]);
                for (std::size_t f = 1; f + 1 < tokens.size(); f += 2) {
                    auto it = rows.find(tokens[f]);
                    if (it == rows.end()) fail(origin, line_no, "unknown row '" + tokens[f] + "'");
                    double v = parse_number(origin, line_no, tokens[f + 1]);
                    if (it->second.sense == 'N') {
                        if (tokens[f] == objective_row) model.base_objective.emplace_back(j, v);
                        // coefficients on extra free rows are ignored
                    } else {
                        row_coeffs[static_cast<std::size_t>(it->second.index)].emplace_back(j, v);
                    }
                }
                break;
            }
            case Section::rhs: {
                if (tokens.size() != 3 && tokens.size() != 5)
                    fail(origin, line_no, "RHS line needs '<set> <row> <val> [<row> <val>]'");
                for (std::size_t f = 1; f + 1 < tokens.size(); f += 2) {
                    auto it = rows.find(tokens[f]);
                    if (it == rows.end()) fail(origin, line_no, "unknown row '" + tokens[f] + "'");
                    it->second.rhs = parse_number(origin, line_no, tokens[f + 1]);
                }
                break;
            }
            case Section::ranges: {
                if (tokens.size() != 3 && tokens.size() != 5)
                    fail(origin, line_no, "RANGES line needs '<set> <row> <val> [<row> <val>]'");
                for (std::size_t f = 1; f + 1 < tokens.size(); f += 2) {
                    auto it = rows.find(tokens[f]);
                    if (it == rows.end()) fail(origin, line_no, "unknown row '" + tokens[f] + "'");
                    it->second.range = parse_number(origin, line_no, tokens[f + 1]);
                }
                break;
            }
            case Section::bounds: {
                if (tokens.size() < 3) fail(origin, line_no, "BOUNDS line needs '<type> <set> <col> [val]'");
                const std::string& type = tokens[0];
                int j = var_index(tokens[2]);
                Variable& v = model.variable(j);
                bool needs_value = !(type == "FR" || type == "MI" || type == "PL" || type == "BV");
                if (needs_value && tokens.size() < 4) fail(origin, line_no, "bound '" + type + "' needs a value");
                double val = needs_value ? parse_number(origin, line_no, tokens[3]) : 0.0;
                if (type == "UP")
                    v.ub = val;
                else if (type == "LO")
                    v.lb = val;
                else if (type == "FX")
                    v.lb = v.ub = val;
                else if (type == "FR") {
                    v.lb = -kInfinity;
                    v.ub = kInfinity;
                } else if (type == "MI")
                    v.lb = -kInfinity;
                else if (type == "PL")
                    v.ub = kInfinity;
                else if (type == "BV") {
                    v.kind = VarKind::binary;
                    v.lb = 0.0;
                    v.ub = 1.0;
                } else if (type == "LI") {
                    v.kind = VarKind::integer;
                    v.lb = val;
                } else if (type == "UI") {
                    v.kind = VarKind::integer;
                    v.ub = val;
                } else {
                    fail(origin, line_no, "unknown bound type '" + type + "'");
                }
                break;
            }
            case Section::name:
                break;
            case Section::none:
                fail(origin, line_no, "data before any section header");
        }
    }

    if (!saw_any_section) throw ParseError("MPS file " + origin + ": empty or headerless file");
    if (!saw_endata && section == Section::none)
        throw ParseError("MPS file " + origin + ": no sections found");

    // materialize constraint rows with their bounds
    std::vector<LinearRow> ordered(row_coeffs.size());
    for (const auto& [rname, info] : rows) {
        if (info.sense == 'N') continue;
        LinearRow row;
        row.name = rname;
        row.coeffs = row_coeffs[static_cast<std::size_t>(info.index)];
        switch (info.sense) {
            case 'L':
                row.lb = -kInfinity;
                row.ub = info.rhs;
                if (!std::isnan(info.range)) row.lb = info.rhs - std::fabs(info.range);
                break;
            case 'G':
                row.lb = info.rhs;
                row.ub = kInfinity;
                if (!std::isnan(info.range)) row.ub = info.rhs + std::fabs(info.range);
                break;
            case 'E':
                row.lb = row.ub = info.rhs;
                if (!std::isnan(info.range)) {
                    if (info.range >= 0)
                        row.ub = info.rhs + info.range;
                    else
                        row.lb = info.rhs + info.range;
                }
                break;
            default:
                break;
        }
        ordered[static_cast<std::size_t>(info.index)] = std::move(row);
    }
    for (auto& row : ordered) model.add_constraint(std::move(row));
    model.validate();
    return model;
}

MilpModel load_mps(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open MPS file '" + path + "'");
    return parse_mps(in, path);
}

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

std::string write_mps_string(const MilpModel& model) {
    std::ostringstream out;
    out << "NAME " << (model.name.empty() ? "MODEL" : model.name) << "\n";
    if (model.base_objective_maximize) out << "OBJSENSE\n MAX\n";
    out << "ROWS\n N OBJ\n";
    for (int i = 0; i < model.num_constraints(); ++i) {
        const LinearRow& r = model.constraint(i);
        char sense;
        if (r.lb == r.ub)
            sense = 'E';
        else if (std::isfinite(r.ub))
            sense = 'L';  // ranged rows are L + RANGES
        else
            sense = 'G';
        out << " " << sense << " " << (r.name.empty() ? "R" + std::to_string(i) : r.name) << "\n";
    }
    out << "COLUMNS\n";
    // column-major entries, with marker blocks around integral columns
    std::vector<std::vector<std::pair<std::string, double>>> per_col(
        static_cast<std::size_t>(model.num_variables()));
    for (const auto& [j, c] : model.base_objective)
        per_col[static_cast<std::size_t>(j)].emplace_back("OBJ", c);
    for (int i = 0; i < model.num_constraints(); ++i) {
        const LinearRow& r = model.constraint(i);
        std::string rname = r.name.empty() ? "R" + std::to_string(i) : r.name;
        for (const auto& [j, c] : r.coeffs) per_col[static_cast<std::size_t>(j)].emplace_back(rname, c);
    }
    bool marker_open = false;
    int marker_id = 0;
    for (int j = 0; j < model.num_variables(); ++j) {
        const Variable& v = model.variable(j);
        bool integral = v.kind != VarKind::continuous;
        if (integral && !marker_open) {
            out << " MK" << marker_id++ << " 'MARKER' 'INTORG'\n";
            marker_open = true;
        } else if (!integral && marker_open) {
            out << " MK" << marker_id++ << " 'MARKER' 'INTEND'\n";
            marker_open = false;
        }
        auto& entries = per_col[static_cast<std::size_t>(j)];
        if (entries.empty()) entries.emplace_back("OBJ", 0.0);  // keep the column declared
        for (const auto& [rname, c] : entries) out << " " << v.name << " " << rname << " " << fmt(c) << "\n";
    }
    if (marker_open) out << " MK" << marker_id++ << " 'MARKER' 'INTEND'\n";
    out << "RHS\n";
    for (int i = 0; i < model.num_constraints(); ++i) {
        const LinearRow& r = model.constraint(i);
        std::string rname = r.name.empty() ? "R" + std::to_string(i) : r.name;
        double rhs = (r.lb == r.ub) ? r.lb : (std::isfinite(r.ub) ? r.ub : r.lb);
        if (rhs != 0.0) out << " RHS1 " << rname << " " << fmt(rhs) << "\n";
    }
    bool any_range = false;
    for (int i = 0; i < model.num_constraints(); ++i) {
        const LinearRow& r = model.constraint(i);
        if (r.lb != r.ub && std::isfinite(r.lb) && std::isfinite(r.ub)) {
            if (!any_range) {
                out << "RANGES\n";
                any_range = true;
            }
            std::string rname = r.name.empty() ? "R" + std::to_string(i) : r.name;
            out << " RNG1 " << rname << " " << fmt(r.ub - r.lb) << "\n";
        }
    }
    out << "BOUNDS\n";
    for (int j = 0; j < model.num_variables(); ++j) {
        const Variable& v = model.variable(j);
        if (v.kind == VarKind::binary) {
            out << " BV BND1 " << v.name << "\n";
            continue;
        }
        if (v.lb == v.ub) {
            out << " FX BND1 " << v.name << " " << fmt(v.lb) << "\n";
            continue;
        }
        if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
            out << " FR BND1 " << v.name << "\n";
            continue;
        }
        if (!std::isfinite(v.lb))
            out << " MI BND1 " << v.name << "\n";
        else if (v.lb != 0.0)
            out << " LO BND1 " << v.name << " " << fmt(v.lb) << "\n";
        if (std::isfinite(v.ub)) out << " UP BND1 " << v.name << " " << fmt(v.ub) << "\n";
    }
    out << "ENDATA\n";
    return out.str();
}

void write_mps(const MilpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << write_mps_string(model);
}

}  // namespace gapgrad
