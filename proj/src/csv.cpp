#include <komega/csv.hpp>

#include <charconv>
#include <fstream>

namespace komega::csv {

namespace {

void require_complete(const sweep::SweepResult& result) {
    if (!result.complete) throw DomainError("csv: sweep result is incomplete");
    const std::size_t expected =
        result.a_grid.size() * result.omegas.size() * result.N_list.size();
    if (result.rows.size() != expected) throw DomainError("csv: sweep result rows are inconsistent");
}

}  // namespace

std::string format_real(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string render_results(const sweep::SweepResult& result) {
    require_complete(result);
    std::string out = "a,omega,N,K";
    for (const auto& name : result.scheme_names) out += ",label_scheme_" + name;
    out += '\n';
    for (const auto& row : result.rows) {
        out += format_real(row.a);
        out += ',';
        out += format_real(row.omega);
        out += ',';
        out += std::to_string(row.N);
        out += ',';
        out += format_real(row.K);
        for (const auto label : row.labels) {
            out += ',';
            out += classify::label_name(label);
        }
        out += '\n';
    }
    return out;
}

std::string render_summary(const sweep::SweepResult& result) {
    require_complete(result);
    std::string out = "N,scheme,Q_u,Q_u_prime,Q_min,Q_min_prime\n";
    for (const auto& entry : result.summaries) {
        out += std::to_string(entry.N);
        out += ',';
        out += entry.scheme_name;
        out += ',';
        out += std::to_string(entry.summary.Qu);
        out += ',';
        out += std::to_string(entry.summary.Qu_prime);
        out += ',';
        out += std::to_string(entry.summary.Qmin);
        out += ',';
        out += std::to_string(entry.summary.Qmin_prime);
        out += '\n';
    }
    return out;
}

std::string render_outliers(const sweep::SweepResult& result, std::size_t scheme_index) {
    require_complete(result);
    if (scheme_index >= result.scheme_names.size())
        throw DomainError("csv: scheme index out of range");
    const std::size_t n_schemes = result.scheme_names.size();
    std::string out = "a,N,M_u_percent\n";
    for (std::size_t ai = 0; ai < result.a_grid.size(); ++ai)
        for (std::size_t Ni = 0; Ni < result.N_list.size(); ++Ni) {
            const auto& entry = result.summaries.at(Ni * n_schemes + scheme_index);
            const auto& counts = entry.summary.per_parameter.at(ai).counts;
            out += format_real(result.a_grid[ai]);
            out += ',';
            out += std::to_string(entry.N);
            out += ',';
            out += format_real(100.0 * static_cast<double>(counts.mu) /
                               static_cast<double>(counts.n_omega));
            out += '\n';
        }
    return out;
}

std::string render_median(const sweep::SweepResult& result) {
    require_complete(result);
    const std::size_t W = result.omegas.size();
    const std::size_t NN = result.N_list.size();
    std::string out = "a,N,median_K\n";
    std::vector<double> Ks(W);
    for (std::size_t ai = 0; ai < result.a_grid.size(); ++ai)
        for (std::size_t Ni = 0; Ni < NN; ++Ni) {
            for (std::size_t wi = 0; wi < W; ++wi)
                Ks[wi] = result.rows[(ai * W + wi) * NN + Ni].K;
            out += format_real(result.a_grid[ai]);
            out += ',';
            out += std::to_string(result.N_list[Ni]);
            out += ',';
            out += format_real(classify::median_k(Ks));
            out += '\n';
        }
    return out;
}

std::string render_probe(const sweep::ProbeTable& table) {
    std::string out = "N,n,log_n,log_D";
    for (const double delta : table.deltas) out += ",in_range_delta_" + format_real(delta);
    out += '\n';
    for (const auto& row : table.rows) {
        out += std::to_string(row.N);
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += format_real(row.log_n);
        out += ',';
        out += format_real(row.log_D);
        for (std::size_t di = 0; di < table.deltas.size(); ++di) {
            out += ',';
            out += table.in_range(row, di) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open output file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DomainError("cannot write output file: " + path);
}

}  // namespace komega::csv
