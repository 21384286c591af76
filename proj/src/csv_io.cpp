// SPDX-License-Identifier: Apache-2.0
#include "evsched/csv_io.hpp"

#include "evsched/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace evsched::csv {

namespace {

constexpr std::string_view kFleetHeader =
    "ev_id,group_id,arrival_slot,departure_slot,p_max_kw,e_req_kwh,e_max_kwh,e_cap_kwh";
constexpr std::string_view kPriceHeader = "slot,price_usd_per_kwh";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

double parse_double(std::string_view cell, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw InputError(where(line_no) + "'" + std::string(cell) + "' is not a number");
    return v;
}

int parse_int(std::string_view cell, std::size_t line_no) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw InputError(where(line_no) + "'" + std::string(cell) + "' is not an integer");
    return v;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    return true;
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

} // namespace

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::vector<Ev> read_fleet(std::istream& in) {
    std::string line;
    if (!read_line(in, line) || trim(line) != kFleetHeader)
        throw InputError("fleet csv: expected header '" + std::string(kFleetHeader) + "'");
    std::vector<Ev> fleet;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 8) throw InputError(where(line_no) + "expected 8 fields");
        Ev ev;
        ev.id = std::string(cells[0]);
        ev.group_id = std::string(cells[1]);
        ev.arrival_slot = parse_int(cells[2], line_no);
        ev.departure_slot = parse_int(cells[3], line_no);
        ev.p_max = parse_double(cells[4], line_no);
        ev.e_req = parse_double(cells[5], line_no);
        ev.e_max = parse_double(cells[6], line_no);
        ev.e_cap = parse_double(cells[7], line_no);
        fleet.push_back(std::move(ev));
    }
    return fleet;
}

std::vector<Ev> read_fleet(const std::filesystem::path& path) {
    auto in = open(path);
    return read_fleet(in);
}

void write_fleet(std::ostream& out, const std::vector<Ev>& fleet) {
    out << kFleetHeader << '\n';
    for (const Ev& ev : fleet) {
        out << ev.id << ',' << ev.group_id << ',' << ev.arrival_slot << ',' << ev.departure_slot << ','
            << format_number(ev.p_max) << ',' << format_number(ev.e_req) << ',' << format_number(ev.e_max) << ','
            << format_number(ev.e_cap) << '\n';
    }
}

std::vector<double> read_prices(std::istream& in) {
    std::string line;
    if (!read_line(in, line) || trim(line) != kPriceHeader)
        throw InputError("price csv: expected header '" + std::string(kPriceHeader) + "'");
    std::vector<double> prices;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 2) throw InputError(where(line_no) + "expected 2 fields");
        const int slot = parse_int(cells[0], line_no);
        if (slot != static_cast<int>(prices.size()))
            throw InputError(where(line_no) + "slot " + std::to_string(slot) + " out of sequence");
        prices.push_back(parse_double(cells[1], line_no));
    }
    return prices;
}

std::vector<double> read_prices(const std::filesystem::path& path) {
    auto in = open(path);
    return read_prices(in);
}

void write_prices(std::ostream& out, std::span<const double> prices) {
    out << kPriceHeader << '\n';
    for (std::size_t t = 0; t < prices.size(); ++t) out << t << ',' << format_number(prices[t]) << '\n';
}

std::vector<double> read_price_column(std::istream& in, std::string_view column, double scale) {
    std::string line;
    if (!read_line(in, line)) throw InputError("price import: empty input");
    const auto header = split(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == column) col = i;
    }
    if (col == header.size()) throw InputError("price import: no column named '" + std::string(column) + "'");
    std::vector<double> prices;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() <= col) throw InputError(where(line_no) + "missing price column");
        prices.push_back(parse_double(cells[col], line_no) * scale);
    }
    return prices;
}

} // namespace evsched::csv
