#include "grlol/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Core>

#include "grlol/errors.hpp"

#ifndef GRLOL_VERSION
#define GRLOL_VERSION "0.1.0"
#endif

namespace grlol::io {

namespace {

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
    return out;
}

void trim(std::string& s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    s.erase(0, i);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    const bool delimited = line.find(',') != std::string::npos || line.find(';') != std::string::npos;
    if (delimited) {
        std::string field;
        for (char c : line) {
            if (c == ',' || c == ';') {
                trim(field);
                out.push_back(field);
                field.clear();
            } else {
                field.push_back(c);
            }
        }
        trim(field);
        out.push_back(field);
    } else {
        std::istringstream is(line);
        std::string field;
        while (is >> field) out.push_back(field);
    }
    return out;
}

bool parse_double(const std::string& s, double& v)
{
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool numeric_row(const std::vector<std::string>& fields)
{
    double v;
    return !fields.empty() && std::all_of(fields.begin(), fields.end(), [&](const std::string& f) { return parse_double(f, v); });
}

// Rows of numbers; the first non-empty line is dropped when it is not numeric.
std::vector<std::vector<double>> read_table(const std::string& path)
{
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_fields(line);
        if (!numeric_row(fields)) {
            if (first) {
                first = false;
                continue;
            }
            throw Error(Errc::invalid_input, path + ":" + std::to_string(lineno) + ": non-numeric field");
        }
        first = false;
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) parse_double(fields[c], row[c]);
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(Errc::invalid_input, path + ":" + std::to_string(lineno) + ": expected " +
                                                 std::to_string(rows.front().size()) + " fields, got " +
                                                 std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(Errc::invalid_input, path + ": no data rows");
    return rows;
}

Index parse_index(double v, const std::string& what)
{
    if (v != std::floor(v) || v < 1.0) throw Error(Errc::invalid_input, what + " must be a positive integer");
    return static_cast<Index>(v);
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_indices(const std::vector<Index>& zero_based)
{
    std::string out;
    for (std::size_t i = 0; i < zero_based.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(zero_based[i] + 1);
    }
    return out;
}

Matrix read_matrix(const std::string& path)
{
    const auto rows = read_table(path);
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

Vector read_vector(const std::string& path)
{
    const Matrix m = read_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw Error(Errc::invalid_input, path + ": expected a single column of values");
}

DesignMatrix read_design(const std::string& path) { return DesignMatrix(read_matrix(path)); }

ResponseVector read_response(const std::string& path) { return ResponseVector(read_vector(path)); }

void write_matrix(const std::string& path, const Matrix& m, const std::vector<std::string>& header)
{
    auto out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    if (!header.empty()) out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

void write_gram(const std::string& path, const Matrix& gram)
{
    std::vector<std::string> header;
    for (Index j = 0; j < gram.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
    write_matrix(path, gram, header);
}

Partition read_partition(const std::string& path, Index k)
{
    const auto rows = read_table(path);
    if (rows.front().size() != 3) throw Error(Errc::invalid_input, path + ": expected group,predictor,rank");
    std::map<Index, std::map<Index, Index>> by_group; // group -> rank -> predictor
    for (const auto& r : rows) {
        const Index g = parse_index(r[0], "group"), l = parse_index(r[1], "predictor"), t = parse_index(r[2], "rank");
        if (!by_group[g].emplace(t, l - 1).second)
            throw Error(Errc::invalid_input, path + ": duplicate rank " + std::to_string(t) + " in group " + std::to_string(g));
    }
    std::vector<IndexSet> groups;
    Index expected_group = 1;
    for (const auto& [g, ranks] : by_group) {
        if (g != expected_group++) throw Error(Errc::bad_group_count, path + ": group numbers must be 1..p without gaps");
        IndexSet members;
        Index expected_rank = 1;
        for (const auto& [t, l] : ranks) {
            if (t != expected_rank++)
                throw Error(Errc::invalid_input, path + ": ranks in group " + std::to_string(g) + " must be 1..t");
            members.push_back(l);
        }
        groups.push_back(std::move(members));
    }
    return Partition::from_groups(std::move(groups), k);
}

void write_partition(const std::string& path, const Partition& part)
{
    auto out = open_out(path);
    out << "group,predictor,rank\n";
    for (Index j = 0; j < part.p(); ++j) {
        const auto& g = part.group(j);
        for (std::size_t t = 0; t < g.size(); ++t) out << j + 1 << ',' << g[t] + 1 << ',' << t + 1 << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

void write_coefficients(const std::string& path, const Vector& beta)
{
    auto out = open_out(path);
    out << "index,value\n";
    for (Index l = 0; l < beta.size(); ++l) out << l + 1 << ',' << format_double(beta(l)) << '\n';
    if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

Vector read_coefficients(const std::string& path)
{
    const auto rows = read_table(path);
    if (rows.front().size() != 2) throw Error(Errc::invalid_input, path + ": expected index,value");
    Vector beta = Vector::Zero(static_cast<Index>(rows.size()));
    std::vector<bool> seen(rows.size(), false);
    for (const auto& r : rows) {
        const Index l = parse_index(r[0], "index");
        if (l > beta.size() || seen[static_cast<std::size_t>(l - 1)])
            throw Error(Errc::invalid_input, path + ": indices must be a permutation of 1..k");
        seen[static_cast<std::size_t>(l - 1)] = true;
        beta(l - 1) = r[1];
    }
    return beta;
}

void write_record(const std::string& path, const Record& rec)
{
    auto out = open_out(path);
    for (const auto& [k, v] : rec) out << k << '=' << v << '\n';
    if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

Record read_record(const std::string& path)
{
    auto in = open_in(path);
    Record rec;
    std::string line;
    while (std::getline(in, line)) {
        trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(Errc::invalid_input, path + ": expected key=value, got '" + line + "'");
        rec.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return rec;
}

std::string record_value(const Record& rec, const std::string& key)
{
    for (const auto& [k, v] : rec)
        if (k == key) return v;
    throw Error(Errc::invalid_input, "record has no key '" + key + "'");
}

void write_manifest(const std::string& output_path, const Record& entries)
{
    Record rec{{"output", output_path}};
    rec.insert(rec.end(), entries.begin(), entries.end());
    rec.emplace_back("grlol_version", GRLOL_VERSION);
    rec.emplace_back("eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION));
    rec.emplace_back("compiler", __VERSION__);
    write_record(output_path + ".manifest", rec);
}

} // namespace grlol::io
