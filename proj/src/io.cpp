#include "qsir/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qsir/errors.hpp"

namespace qsir::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ParseError("line " + std::to_string(line_no) + ": '" + t + "' is not a number");
    return v;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no,
                       std::vector<std::string>* comments = nullptr) {
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            if (comments) comments->push_back(t);
            continue;
        }
        line = t;
        return true;
    }
    return false;
}

std::string join_numbers(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::uint64_t metadata_u64(const std::map<std::string, std::string>& meta, const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) return 0;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("metadata " + key + " is not an unsigned integer");
    return v;
}

// Rows of `width` numbers up to the next '[' section line or end of input.
Matrix read_block(std::istream& in, std::size_t width, std::size_t& line_no, std::string& pending) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::string line;
    pending.clear();
    while (next_content_line(in, line, line_no)) {
        if (line.front() == '[') {
            pending = line;
            break;
        }
        const auto cells = split(line, ',');
        if (cells.size() != width)
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " columns");
        for (const auto& c : cells) values.push_back(parse_number(c, line_no));
        ++rows;
    }
    return Matrix(rows, width, std::move(values));
}

void expect_line(std::istream& in, const std::string& expected, std::size_t& line_no) {
    std::string line;
    if (!next_content_line(in, line, line_no) || line != expected)
        throw ParseError("line " + std::to_string(line_no) + ": expected '" + expected + "'");
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::map<std::string, std::string> parse_metadata(const std::string& line) {
    std::string body = trim(line);
    if (!body.empty() && body.front() == '#') body = trim(body.substr(1));
    std::map<std::string, std::string> out;
    for (const auto& item : split(body, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("metadata entry '" + item + "' lacks '='");
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!next_content_line(in, line, line_no, &table.comments)) throw ParseError("CSV has no header row");
    table.header = split(line, ',');
    for (const auto& h : table.header) {
        if (h.empty()) throw ParseError("CSV header has an empty column name");
        char* end = nullptr;
        std::strtod(h.c_str(), &end);
        if (end == h.c_str() + h.size()) throw ParseError("CSV header row is missing");
    }
    const std::size_t width = table.header.size();
    std::vector<double> values;
    std::size_t rows = 0;
    while (next_content_line(in, line, line_no, &table.comments)) {
        const auto cells = split(line, ',');
        if (cells.size() != width)
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " columns, found " + std::to_string(cells.size()));
        for (const auto& c : cells) values.push_back(parse_number(c, line_no));
        ++rows;
    }
    table.values = Matrix(rows, width, std::move(values));
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_csv(in);
}

DataSet dataset_from_table(const CsvTable& table) {
    const std::size_t w = table.values.cols();
    if (w < 2) throw ParseError("data file needs at least one covariate column and a response column");
    const std::size_t n = table.values.rows();
    DataSet data{Matrix(n, w - 1), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j + 1 < w; ++j) data.x(i, j) = table.values(i, j);
        data.y[i] = table.values(i, w - 1);
    }
    return data;
}

void write_dataset(std::ostream& out, const DataSet& data) {
    data.validate();
    for (std::size_t j = 0; j < data.dimension(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out << join_numbers(data.x.row(i)) << ',' << format_double(data.y[i]) << '\n';
}

void write_codebook(std::ostream& out, const Codebook& codebook) {
    out << "# N=" << codebook.size() << ",d=" << codebook.dimension()
        << ",p=" << format_double(codebook.norm_order()) << ",seed=" << codebook.seed() << '\n';
    for (std::size_t j = 0; j < codebook.dimension(); ++j) out << (j ? "," : "") << 'c' << (j + 1);
    out << '\n';
    for (std::size_t k = 0; k < codebook.size(); ++k) out << join_numbers(codebook.point(k)) << '\n';
}

Codebook read_codebook(std::istream& in) {
    CsvTable t = read_csv(in);
    std::map<std::string, std::string> meta;
    for (const auto& c : t.comments)
        if (c.find('=') != std::string::npos) meta = parse_metadata(c);
    double p = 2.0;
    if (auto it = meta.find("p"); it != meta.end()) p = parse_number(it->second, 0);
    if (auto it = meta.find("N"); it != meta.end() && metadata_u64(meta, "N") != t.values.rows())
        throw ParseError("codebook metadata N does not match the row count");
    return Codebook(std::move(t.values), p, metadata_u64(meta, "seed"));
}

void write_estimates(std::ostream& out, std::span<const SirEstimate> estimates) {
    if (estimates.empty()) throw ArgumentError("write_estimates: nothing to write");
    const std::size_t d = estimates.front().direction.size();
    out << "method,d";
    for (std::size_t j = 0; j < d; ++j) out << ",beta" << (j + 1);
    out << ",principal_value\n";
    for (const auto& e : estimates) {
        if (e.direction.size() != d) throw ArgumentError("write_estimates: mixed dimensions");
        out << to_string(e.method) << ',' << d << ',' << join_numbers(e.direction) << ','
            << format_double(e.principal_value) << '\n';
    }
}

std::vector<double> read_estimate_direction(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!next_content_line(in, line, line_no)) throw ParseError("estimate file is empty");
    const auto header = split(line, ',');
    if (header.size() < 4 || header[0] != "method" || header[1] != "d")
        throw ParseError("estimate file header must start with 'method,d'");
    if (!next_content_line(in, line, line_no)) throw ParseError("estimate file has no rows");
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw ParseError("estimate row width does not match header");
    const auto d = static_cast<std::size_t>(parse_number(cells[1], line_no));
    if (d + 3 != cells.size()) throw ParseError("estimate row dimension does not match its columns");
    std::vector<double> out;
    for (std::size_t j = 0; j < d; ++j) out.push_back(parse_number(cells[2 + j], line_no));
    return out;
}

void write_transition(std::ostream& out, const TransitionModel& model) {
    out << "# m_u=" << model.input_grid().size() << ",m_y=" << model.output_grid().size()
        << ",n=" << model.sample_size() << ",seed=" << model.input_grid().seed()
        << ",p=" << format_double(model.input_grid().norm_order()) << '\n';
    out << "[input_grid]\nu\n";
    for (double v : model.input_grid().points().data()) out << format_double(v) << '\n';
    out << "[output_grid]\ny\n";
    for (double v : model.output_grid().points().data()) out << format_double(v) << '\n';
    out << "[matrix]\ncount";
    for (std::size_t k = 0; k < model.output_grid().size(); ++k) out << ",p" << (k + 1);
    out << '\n';
    for (std::size_t r = 0; r < model.matrix().rows(); ++r)
        out << model.row_counts()[r] << ',' << join_numbers(model.matrix().row(r)) << '\n';
}

TransitionModel read_transition(std::istream& in) {
    std::size_t line_no = 0;
    std::string line;
    std::vector<std::string> comments;
    if (!next_content_line(in, line, line_no, &comments) || line != "[input_grid]")
        throw ParseError("transition file must start with [input_grid]");
    std::map<std::string, std::string> meta;
    for (const auto& c : comments)
        if (c.find('=') != std::string::npos) meta = parse_metadata(c);
    const std::uint64_t seed = metadata_u64(meta, "seed");
    double p = 2.0;
    if (auto it = meta.find("p"); it != meta.end()) p = parse_number(it->second, 0);

    std::string pending;
    expect_line(in, "u", line_no);
    Matrix input = read_block(in, 1, line_no, pending);
    if (pending != "[output_grid]") throw ParseError("expected [output_grid]");
    expect_line(in, "y", line_no);
    Matrix output = read_block(in, 1, line_no, pending);
    if (pending != "[matrix]") throw ParseError("expected [matrix]");
    if (!next_content_line(in, line, line_no) || split(line, ',').size() != output.rows() + 1)
        throw ParseError("line " + std::to_string(line_no) + ": bad matrix header");
    Matrix rows = read_block(in, output.rows() + 1, line_no, pending);
    if (rows.rows() != input.rows()) throw ParseError("matrix row count does not match the input grid");

    Matrix probs(rows.rows(), output.rows());
    std::vector<std::size_t> counts(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const double c = rows(r, 0);
        if (c < 0.0 || c != static_cast<double>(static_cast<std::size_t>(c)))
            throw ParseError("row counts must be non-negative integers");
        counts[r] = static_cast<std::size_t>(c);
        for (std::size_t k = 0; k < output.rows(); ++k) probs(r, k) = rows(r, k + 1);
    }
    return TransitionModel(Codebook(std::move(input), p, seed), Codebook(std::move(output), p, seed),
                           std::move(probs), std::move(counts));
}

void write_report(std::ostream& out, const ExperimentReport& report) {
    out << "model_id,theta,n,d,N,m,B,replication,metric_name,metric_value\n";
    for (const auto& r : report.rows) {
        out << r.model_id << ',' << (r.theta ? format_double(*r.theta) : std::string()) << ','
            << r.n << ',' << r.d << ',' << r.grid_x << ',' << r.grid_y << ',' << r.grids << ','
            << r.replication << ',' << r.metric_name << ',' << format_double(r.metric_value) << '\n';
    }
}

void write_summary(std::ostream& out, std::span<const SummaryRow> summary) {
    out << "model_id,theta,n,d,N,m,B,metric_name,count,mean,min,q1,median,q3,max\n";
    for (const auto& s : summary) {
        const auto& k = s.key;
        out << k.model_id << ',' << (k.theta ? format_double(*k.theta) : std::string()) << ',' << k.n
            << ',' << k.d << ',' << k.grid_x << ',' << k.grid_y << ',' << k.grids << ','
            << k.metric_name << ',' << s.count << ',' << format_double(s.mean) << ','
            << format_double(s.min) << ',' << format_double(s.q1) << ',' << format_double(s.median)
            << ',' << format_double(s.q3) << ',' << format_double(s.max) << '\n';
    }
}

std::vector<double> parse_vector(const std::string& text) {
    std::string normalized = text;
    for (char& c : normalized)
        if (c == ',' || c == ';') c = ' ';
    std::istringstream ss(normalized);
    std::vector<double> out;
    std::string token;
    while (ss >> token) out.push_back(parse_number(token, 0));
    if (out.empty()) throw ParseError("empty vector '" + text + "'");
    return out;
}

} // namespace qsir::io
