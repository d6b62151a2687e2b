#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace strobo {

/// Sampled observables: strictly increasing times, one complex column per name.
struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<std::complex<double>>> columns;
    bool truncation_ok = true;
    /// Largest top-level population seen per bosonic slot (empty when not tracked).
    std::vector<double> max_top_population;

    std::size_t size() const { return times.size(); }
    bool has(const std::string& name) const;
    const std::vector<std::complex<double>>& column(const std::string& name) const;
    std::vector<double> real(const std::string& name) const;

    void add_column(std::string name);
    /// Throws std::logic_error on non-increasing times or ragged columns.
    void validate() const;

    /// Header "t" plus one column per observable; complex columns are split
    /// into name_re and name_im unless purely real. 17 significant digits.
    void write_csv(std::ostream& os) const;
};

}  // namespace strobo
