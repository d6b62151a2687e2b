#include "strobo/timeseries.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace strobo {

bool TimeSeries::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<std::complex<double>>& TimeSeries::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw std::invalid_argument("TimeSeries: no column '" + name + "'");
    }
    return columns[static_cast<std::size_t>(it - names.begin())];
}

std::vector<double> TimeSeries::real(const std::string& name) const {
    const auto& c = column(name);
    std::vector<double> out(c.size());
    std::transform(c.begin(), c.end(), out.begin(), [](auto z) { return z.real(); });
    return out;
}

void TimeSeries::add_column(std::string name) {
    if (has(name)) {
        throw std::invalid_argument("TimeSeries: duplicate column '" + name + "'");
    }
    names.push_back(std::move(name));
    columns.emplace_back();
}

void TimeSeries::validate() const {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw std::logic_error("TimeSeries: times not strictly increasing");
        }
    }
    if (names.size() != columns.size()) {
        throw std::logic_error("TimeSeries: names and columns differ in count");
    }
    for (const auto& c : columns) {
        if (c.size() != times.size()) {
            throw std::logic_error("TimeSeries: column length differs from time grid");
        }
    }
}

void TimeSeries::write_csv(std::ostream& os) const {
    validate();
    std::vector<bool> complex_col(columns.size(), false);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        complex_col[j] = std::any_of(columns[j].begin(), columns[j].end(),
                                     [](auto z) { return z.imag() != 0.0; });
    }
    const auto old_precision = os.precision(17);
    os << "t";
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (complex_col[j]) {
            os << ',' << names[j] << "_re," << names[j] << "_im";
        } else {
            os << ',' << names[j];
        }
    }
    os << '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << times[i];
        for (std::size_t j = 0; j < columns.size(); ++j) {
            os << ',' << columns[j][i].real();
            if (complex_col[j]) os << ',' << columns[j][i].imag();
        }
        os << '\n';
    }
    os.precision(old_precision);
}

}  // namespace strobo
