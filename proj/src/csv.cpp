#include "qantenna/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace qantenna {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("csv: empty header");
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw std::invalid_argument("csv: no column '" + name + "'");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) +
                                    " cells, header has " + std::to_string(header_.size()));
    cells_.push_back(std::move(cells));
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    return parse_double(cell(row, column(name)));
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const auto& r : cells_) out.push_back(parse_double(r[c]));
    return out;
}

namespace {

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

void CsvTable::write(std::ostream& out) const {
    write_line(out, header_);
    for (const auto& r : cells_) write_line(out, r);
}

CsvTable CsvTable::read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    CsvTable t(split(line));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header_.size())
            throw std::invalid_argument("csv: line " + std::to_string(lineno) + " has " +
                                        std::to_string(cells.size()) + " cells");
        t.cells_.push_back(std::move(cells));
    }
    return t;
}

RowBuilder& RowBuilder::operator<<(double v) {
    cells_.push_back(format_double(v));
    return *this;
}

RowBuilder& RowBuilder::operator<<(int v) {
    cells_.push_back(std::to_string(v));
    return *this;
}

RowBuilder& RowBuilder::operator<<(std::size_t v) {
    cells_.push_back(std::to_string(v));
    return *this;
}

RowBuilder& RowBuilder::operator<<(const std::string& s) {
    if (s.find_first_of(",\n") != std::string::npos)
        throw std::invalid_argument("csv: text cell contains a separator: '" + s + "'");
    cells_.push_back(s);
    return *this;
}

}  // namespace qantenna
