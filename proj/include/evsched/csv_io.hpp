// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace evsched::csv {

/// Header: ev_id,group_id,arrival_slot,departure_slot,p_max_kw,e_req_kwh,e_max_kwh,e_cap_kwh
std::vector<Ev> read_fleet(std::istream& in);
std::vector<Ev> read_fleet(const std::filesystem::path& path);
void write_fleet(std::ostream& out, const std::vector<Ev>& fleet);

/// Header: slot,price_usd_per_kwh. Slots must be 0..T-1 in order.
std::vector<double> read_prices(std::istream& in);
std::vector<double> read_prices(const std::filesystem::path& path);
void write_prices(std::ostream& out, std::span<const double> prices);

/// Reads one numeric column (by header name) from an arbitrary CSV, e.g. a
/// market-operator export, scaling every value by `scale`.
std::vector<double> read_price_column(std::istream& in, std::string_view column, double scale);

/// Shortest round-trippable decimal form, '.' separator.
std::string format_number(double v);

} // namespace evsched::csv
