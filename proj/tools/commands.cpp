#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "qse/approx.hpp"
#include "qse/errors.hpp"
#include "qse/feee.hpp"
#include "qse/observables.hpp"
#include "qse/oracle.hpp"
#include "qse/rng.hpp"
#include "qse/rpse.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qse;

namespace qsecli {

namespace {

constexpr int kSchemaVersion = 1;

std::string branch_name(EnergyBranch branch) {
    switch (branch) {
    case EnergyBranch::BelowEstar: return "below_e_star";
    case EnergyBranch::AtEstar: return "at_e_star";
    case EnergyBranch::AboveEstar: return "above_e_star";
    }
    return "unknown";
}

json stats_json(const SummaryStats& s) {
    json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["std_dev"] = s.std_dev;
    if (s.rel_width) {
        j["rel_width"] = *s.rel_width;
    } else {
        j["rel_width"] = nullptr;
    }
    return j;
}

void write_json_output(const json& j, const std::string& out_file) {
    if (out_file.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_file);
    if (!out) {
        throw IoError("cannot open " + out_file + " for writing");
    }
    out << j.dump(2) << "\n";
}

void write_histogram_file(const fs::path& path, const Histogram& histogram) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_histogram_csv(out, histogram);
}

std::vector<std::uint64_t> split_across_chains(std::uint64_t total, int chains) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(chains));
    const auto base = total / static_cast<std::uint64_t>(chains);
    const auto extra = total % static_cast<std::uint64_t>(chains);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        counts[c] = base + (c < extra ? 1 : 0);
    }
    return counts;
}

// Layout of the per-sample observables shared by both sampling commands.
struct SampleLayout {
    std::size_t dim = 0;
    std::optional<int> n_spins;
    double entropy_lo = 0.0;
    double entropy_hi = 1.0;
    int bins = 30;
    std::vector<std::size_t> pop_indices; ///< 0-based
    std::vector<double> pop_hi;           ///< histogram upper edge per index
};

SampleLayout make_layout(std::size_t dim, std::optional<int> n_spins,
                         const SampleOptions& options,
                         const std::vector<double>& predicted_means) {
    if (dim < 2) {
        throw UsageError("need at least two states");
    }
    SampleLayout layout;
    layout.dim = dim;
    layout.n_spins = n_spins;
    layout.bins = options.bins;
    if (options.bins < 1) {
        throw UsageError("--bins must be at least 1");
    }
    if (options.range.empty()) {
        layout.entropy_lo = 0.0;
        layout.entropy_hi = 1.05 * std::log(static_cast<double>(dim));
    } else if (options.range.size() == 2 && options.range[0] < options.range[1]) {
        layout.entropy_lo = options.range[0];
        layout.entropy_hi = options.range[1];
    } else {
        throw UsageError("--range needs two values with lo < hi");
    }
    for (std::size_t label : options.populations) {
        if (label < 1 || label > dim) {
            throw UsageError("--pop-hist index " + std::to_string(label) +
                             " outside 1.." + std::to_string(dim));
        }
        const std::size_t k = label - 1;
        layout.pop_indices.push_back(k);
        // Eight predicted means cover an exponential-like marginal's support.
        layout.pop_hi.push_back(std::min(1.0, 8.0 * predicted_means[k]));
    }
    return layout;
}

struct ChainAccumulator {
    RunningStats entropy;
    Histogram entropy_hist;
    std::optional<RunningStats> per_spin;
    std::optional<Histogram> per_spin_hist;
    std::vector<RunningStats> pop_stats;
    std::vector<Histogram> pop_hists;

    explicit ChainAccumulator(const SampleLayout& layout)
        : entropy_hist(layout.entropy_lo, layout.entropy_hi, layout.bins) {
        if (layout.n_spins) {
            per_spin.emplace();
            per_spin_hist.emplace(layout.entropy_lo / *layout.n_spins,
                                  layout.entropy_hi / *layout.n_spins, layout.bins);
        }
        for (double hi : layout.pop_hi) {
            pop_stats.emplace_back();
            pop_hists.emplace_back(0.0, hi, layout.bins);
        }
    }

    void merge(const ChainAccumulator& other) {
        entropy.merge(other.entropy);
        entropy_hist.merge(other.entropy_hist);
        if (per_spin) {
            per_spin->merge(*other.per_spin);
            per_spin_hist->merge(*other.per_spin_hist);
        }
        for (std::size_t i = 0; i < pop_stats.size(); ++i) {
            pop_stats[i].merge(other.pop_stats[i]);
            pop_hists[i].merge(other.pop_hists[i]);
        }
    }
};

class SampleWriter {
public:
    SampleWriter() = default;
    explicit SampleWriter(const fs::path& path) : file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) {
            throw IoError("cannot open " + path.string() + " for writing");
        }
    }
    SampleWriter(const SampleWriter&) = delete;
    SampleWriter& operator=(const SampleWriter&) = delete;
    ~SampleWriter() {
        if (file_) {
            std::fclose(file_);
        }
    }

    void row(std::span<const double> values) {
        for (std::size_t k = 0; k < values.size(); ++k) {
            std::fprintf(file_, k ? ",%.17g" : "%.17g", values[k]);
        }
        std::fputc('\n', file_);
    }

    void close() {
        if (file_) {
            std::fclose(file_);
            file_ = nullptr;
        }
    }

private:
    FILE* file_ = nullptr;
};

void record_sample(ChainAccumulator& acc, const SampleLayout& layout,
                   const PopulationVector& p, SampleWriter* writer) {
    const double s = shannon_entropy(p);
    acc.entropy.add(s);
    acc.entropy_hist.add(s);
    if (acc.per_spin) {
        const double per = s / *layout.n_spins;
        acc.per_spin->add(per);
        acc.per_spin_hist->add(per);
    }
    for (std::size_t i = 0; i < layout.pop_indices.size(); ++i) {
        const double v = p.p[layout.pop_indices[i]];
        acc.pop_stats[i].add(v);
        acc.pop_hists[i].add(v);
    }
    if (writer) {
        writer->row(p.p);
    }
}

fs::path chain_samples_path(const fs::path& dir, std::size_t chain) {
    return dir / ("samples.chain" + std::to_string(chain) + ".tmp");
}

void concatenate_samples(const fs::path& dir, std::size_t chains) {
    std::ofstream out(dir / "samples.csv", std::ios::binary);
    if (!out) {
        throw IoError("cannot open samples.csv for writing");
    }
    for (std::size_t c = 0; c < chains; ++c) {
        const fs::path part = chain_samples_path(dir, c);
        std::ifstream in(part, std::ios::binary);
        if (!in) {
            throw IoError("missing per-chain samples file " + part.string());
        }
        out << in.rdbuf();
        in.close();
        fs::remove(part);
    }
}

/// Runs `worker(chain, kept_target, accumulator, writer)` once per chain on
/// its own thread and merges the results in chain order.
void run_chain_workers(
    const SampleLayout& layout, const SampleOptions& options,
    ChainAccumulator& merged,
    const std::function<void(std::size_t, std::uint64_t, ChainAccumulator&,
                             SampleWriter*)>& worker) {
    if (options.chains < 1) {
        throw UsageError("--chains must be at least 1");
    }
    const fs::path dir(options.out_dir);
    fs::create_directories(dir);
    const auto counts = split_across_chains(options.samples,
                                            options.chains);

    std::vector<ChainAccumulator> parts;
    std::vector<std::unique_ptr<SampleWriter>> writers;
    parts.reserve(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        parts.emplace_back(layout);
        writers.push_back(options.write_samples
                              ? std::make_unique<SampleWriter>(chain_samples_path(dir, c))
                              : nullptr);
    }

    std::vector<std::exception_ptr> failures(counts.size());
    std::vector<std::thread> threads;
    threads.reserve(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        threads.emplace_back([&, c] {
            try {
                worker(c, counts[c], parts[c], writers[c].get());
            } catch (...) {
                failures[c] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (failures[c]) {
            std::rethrow_exception(failures[c]);
        }
    }

    for (std::size_t c = 0; c < counts.size(); ++c) {
        writers[c].reset(); // flush before concatenation
        merged.merge(parts[c]);
    }
    if (options.write_samples) {
        concatenate_samples(dir, counts.size());
    }
}

void write_common_histograms(const fs::path& dir, const SampleLayout& layout,
                             const ChainAccumulator& acc,
                             const SampleOptions& options) {
    write_histogram_file(dir / "entropy_hist.csv", acc.entropy_hist);
    if (acc.per_spin_hist) {
        write_histogram_file(dir / "entropy_per_spin_hist.csv", *acc.per_spin_hist);
    }
    for (std::size_t i = 0; i < layout.pop_indices.size(); ++i) {
        const auto label = std::to_string(options.populations[i]);
        write_histogram_file(dir / ("pop_" + label + "_hist.csv"), acc.pop_hists[i]);
    }
}

json measured_json(const SampleLayout& layout, const ChainAccumulator& acc,
                   const SampleOptions& options) {
    json m;
    m["entropy"] = stats_json(finalize(acc.entropy));
    if (acc.per_spin) {
        m["entropy_per_spin"] = stats_json(finalize(*acc.per_spin));
    }
    json pops = json::object();
    for (std::size_t i = 0; i < layout.pop_indices.size(); ++i) {
        pops[std::to_string(options.populations[i])] =
            stats_json(finalize(acc.pop_stats[i]));
    }
    m["populations"] = pops;
    return m;
}

json config_json(const SampleOptions& options, const SampleLayout& layout) {
    json c;
    c["samples"] = options.samples;
    c["seed"] = options.seed;
    c["chains"] = options.chains;
    c["bins"] = options.bins;
    c["entropy_range"] = {layout.entropy_lo, layout.entropy_hi};
    c["populations"] = options.populations;
    c["write_samples"] = options.write_samples;
    c["dim"] = layout.dim;
    if (layout.n_spins) {
        c["n_spins"] = *layout.n_spins;
    } else {
        c["n_spins"] = nullptr;
    }
    return c;
}

struct ValidationCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

ValidationCheck make_check(std::string name, double threshold) {
    ValidationCheck c;
    c.name = std::move(name);
    c.threshold = threshold;
    return c;
}

void report_checks(const std::vector<ValidationCheck>& checks) {
    for (const auto& c : checks) {
        std::printf("[%s] %-34s measured=%.3e threshold=%.3e%s%s\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.threshold,
                    c.detail.empty() ? "" : "  ", c.detail.c_str());
    }
}

EnergySpectrum random_validation_spectrum(RandomStream& rng, std::size_t n) {
    std::vector<double> levels{0.0};
    double e = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        e += 0.05 + 2.0 * rng.uniform_half_open();
        levels.push_back(e);
    }
    return EnergySpectrum::from_levels(std::move(levels));
}

// Brute-force scan used by the validate command; mirrors the test oracles but
// ships with the binary so field builds can self-check.
double scan_multiplier_ratio(std::span<const double> levels, double energy) {
    double mean = 0.0;
    for (double e : levels) {
        mean += e;
    }
    mean /= static_cast<double>(levels.size());
    const double e_top = levels.back();
    const bool below = energy < mean;
    const auto value_at = [&](double t) {
        const double z = below ? t : -e_top - 1.0 / t;
        double num = 0.0;
        double den = 0.0;
        for (double e : levels) {
            num += e / (z + e);
            den += 1.0 / (z + e);
        }
        return num / den;
    };
    double lo = 1e-9;
    double hi = lo * 1.02;
    bool bracketed = false;
    for (; hi < 1e12; lo = hi, hi *= 1.02) {
        if ((value_at(lo) - energy) * (value_at(hi) - energy) <= 0.0) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed) {
        throw NumericError("validation scan failed to bracket the multiplier ratio");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((value_at(lo) - energy) * (value_at(mid) - energy) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double t = 0.5 * (lo + hi);
    return below ? t : -e_top - 1.0 / t;
}

} // namespace

ResolvedSpectrum resolve_spectrum(const SpectrumOptions& options) {
    const bool by_spins = options.spins > 0;
    const bool by_file = !options.spectrum_file.empty();
    if (by_spins == by_file) {
        throw UsageError("give exactly one of --spins or --spectrum-file");
    }

    ResolvedSpectrum out;
    if (by_spins) {
        std::vector<double> freq = options.frequencies;
        if (freq.empty()) {
            freq.assign(static_cast<std::size_t>(options.spins), 1.0);
        } else if (freq.size() == 1) {
            freq.assign(static_cast<std::size_t>(options.spins), freq[0]);
        } else if (freq.size() != static_cast<std::size_t>(options.spins)) {
            throw UsageError("--freq needs one value or one per spin");
        }
        out.spectrum = std::make_shared<EnergySpectrum>(
            build_spin_spectrum(options.spins, freq, options.max_spins));
        out.source = std::to_string(options.spins) + " spins";
        return out;
    }

    bool shifted = false;
    const auto policy = options.no_shift ? OriginPolicy::Reject : OriginPolicy::AutoShift;
    out.spectrum = std::make_shared<EnergySpectrum>(
        load_spectrum(options.spectrum_file, policy, &shifted));
    out.shifted = shifted;
    out.source = options.spectrum_file;
    if (shifted) {
        std::cerr << "note: levels shifted so the ground level is zero\n";
    }
    return out;
}

namespace {

double resolve_energy(const ResolvedSpectrum& rs, const EnergyOptions& options) {
    const bool by_energy = options.energy != 0.0;
    const bool by_eps = options.eps != 0.0;
    if (by_energy == by_eps) {
        throw UsageError("give exactly one of --energy or --eps");
    }
    double energy = options.energy;
    if (by_eps) {
        if (!rs.spectrum->n_spins()) {
            throw UsageError("--eps needs a spin spectrum; use --energy with "
                             "--spectrum-file");
        }
        energy = options.eps * *rs.spectrum->n_spins();
    }
    if (!(energy > 0.0) || !(energy < rs.spectrum->e_max())) {
        std::ostringstream msg;
        msg << "energy " << energy << " outside (0, " << rs.spectrum->e_max() << ")";
        throw UsageError(msg.str());
    }
    return energy;
}

json spectrum_json(const ResolvedSpectrum& rs) {
    const auto& spec = *rs.spectrum;
    json j;
    j["dim"] = spec.dim();
    j["source"] = rs.source;
    j["shifted"] = rs.shifted;
    if (spec.n_spins()) {
        j["n_spins"] = *spec.n_spins();
        j["frequencies"] = std::vector<double>(spec.frequencies().begin(),
                                               spec.frequencies().end());
    } else {
        j["n_spins"] = nullptr;
        j["frequencies"] = nullptr;
    }
    const SpectrumConstants c = constants(spec);
    j["constants"] = {{"e_star", c.e_star},
                      {"e_max", c.e_max},
                      {"s0", c.s0},
                      {"f0", c.f0}};
    return j;
}

} // namespace

int cmd_spectrum(const SpectrumOptions& options, const std::string& out_file) {
    const ResolvedSpectrum rs = resolve_spectrum(options);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "spectrum";
    j["spectrum"] = spectrum_json(rs);
    if (rs.spectrum->dim() <= 4096) {
        j["levels"] = std::vector<double>(rs.spectrum->levels().begin(),
                                          rs.spectrum->levels().end());
    }
    std::cout << j.dump(2) << "\n";
    if (!out_file.empty()) {
        save_spectrum(*rs.spectrum, out_file);
    }
    return 0;
}

int cmd_sample_rpse(std::size_t dim, const SpectrumOptions& spectrum,
                    const SampleOptions& sample) {
    std::optional<int> n_spins;
    if (dim > 0 && spectrum.spins > 0) {
        throw UsageError("give exactly one of --dim or --spins");
    }
    if (spectrum.spins > 0) {
        if (spectrum.spins > spectrum.max_spins) {
            throw UsageError("--spins above --max-spins");
        }
        n_spins = spectrum.spins;
        dim = std::size_t{1} << spectrum.spins;
    }
    if (dim == 0) {
        throw UsageError("give exactly one of --dim or --spins");
    }

    const std::vector<double> predicted_means(dim, 1.0 / static_cast<double>(dim));
    const SampleLayout layout = make_layout(dim, n_spins, sample, predicted_means);

    ChainAccumulator merged(layout);
    run_chain_workers(layout, sample, merged,
                      [&](std::size_t chain, std::uint64_t kept, ChainAccumulator& acc,
                          SampleWriter* writer) {
                          RandomStream rng(sample.seed, chain);
                          for (std::uint64_t s = 0; s < kept; ++s) {
                              record_sample(acc, layout, sample_simplex(dim, rng), writer);
                          }
                      });

    const fs::path dir(sample.out_dir);
    write_common_histograms(dir, layout, merged, sample);

    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "sample-rpse";
    j["config"] = config_json(sample, layout);
    j["measured"] = measured_json(layout, merged, sample);
    json per_chain = json::array();
    const auto counts = split_across_chains(sample.samples, sample.chains);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        per_chain.push_back({{"chain", c}, {"kept", counts[c]}});
    }
    j["measured"]["per_chain"] = per_chain;
    j["predicted"] = {
        {"mean_entropy_exact", rpse_exact_mean_entropy(dim)},
        {"mean_entropy_asymptotic", mean_entropy_rpse(dim)},
        {"entropy_rel_width", entropy_rel_width_rpse(dim)},
        {"population_mean", 1.0 / static_cast<double>(dim)},
    };

    std::ofstream out(dir / "summary.json");
    if (!out) {
        throw IoError("cannot open summary.json for writing");
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_sample_feee(const SpectrumOptions& spectrum, const EnergyOptions& energy,
                    const ChainOptions& chain, const SampleOptions& sample) {
    const ResolvedSpectrum rs = resolve_spectrum(spectrum);
    const double e = resolve_energy(rs, energy);
    const FeeeTarget target(rs.spectrum, e);

    const ApproxDistribution surrogate = feee_approx_i(*rs.spectrum, e);
    const std::vector<double> predicted_means = surrogate.means();
    const SampleLayout layout =
        make_layout(rs.spectrum->dim(), rs.spectrum->n_spins(), sample, predicted_means);

    if (chain.burn_in < -1) {
        throw UsageError("--burn-in must be nonnegative (or omitted for the default)");
    }
    ChainConfig config;
    config.burn_in = chain.burn_in >= 0 ? static_cast<std::uint64_t>(chain.burn_in)
                                        : default_burn_in(target);
    config.thinning = chain.thinning;
    config.proposal_scale = chain.proposal_scale;
    config.adapt_during_burn_in = !chain.no_adapt;
    if (config.thinning < 1) {
        throw UsageError("--thinning must be at least 1");
    }
    if (!(config.proposal_scale > 0.0)) {
        throw UsageError("--proposal-scale must be positive");
    }

    std::vector<RunSummary> chain_summaries(static_cast<std::size_t>(sample.chains));
    ChainAccumulator merged(layout);
    run_chain_workers(layout, sample, merged,
                      [&](std::size_t c, std::uint64_t kept, ChainAccumulator& acc,
                          SampleWriter* writer) {
                          ChainConfig cfg = config;
                          cfg.steps = cfg.burn_in + kept * cfg.thinning;
                          RandomStream rng(sample.seed, c);
                          chain_summaries[c] = run_chain(
                              target, cfg, rng, [&](const PopulationVector& p) {
                                  record_sample(acc, layout, p, writer);
                              });
                      });

    const fs::path dir(sample.out_dir);
    write_common_histograms(dir, layout, merged, sample);

    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "sample-feee";
    j["config"] = config_json(sample, layout);
    j["config"]["energy"] = e;
    if (rs.spectrum->n_spins()) {
        j["config"]["energy_per_spin"] = e / *rs.spectrum->n_spins();
    } else {
        j["config"]["energy_per_spin"] = nullptr;
    }
    j["config"]["burn_in"] = config.burn_in;
    j["config"]["thinning"] = config.thinning;
    j["config"]["proposal_scale"] = config.proposal_scale;
    j["config"]["adapt_during_burn_in"] = config.adapt_during_burn_in;
    j["spectrum"] = spectrum_json(rs);

    j["measured"] = measured_json(layout, merged, sample);
    std::uint64_t total_steps = 0;
    std::uint64_t total_accepted = 0;
    json per_chain = json::array();
    for (std::size_t c = 0; c < chain_summaries.size(); ++c) {
        const RunSummary& s = chain_summaries[c];
        total_steps += s.steps;
        total_accepted += s.accepted;
        per_chain.push_back({{"chain", c},
                             {"steps", s.steps},
                             {"kept", s.kept},
                             {"accepted", s.accepted},
                             {"acceptance_rate", s.acceptance_rate},
                             {"initial_proposal_scale", s.initial_proposal_scale},
                             {"final_proposal_scale", s.final_proposal_scale}});
    }
    j["measured"]["per_chain"] = per_chain;
    j["measured"]["acceptance_rate"] =
        total_steps > 0 ? static_cast<double>(total_accepted) / total_steps : 0.0;

    const LagrangeSolution mult = solve_lagrange(*rs.spectrum, e);
    json predicted;
    predicted["lagrange"] = {{"lambda", mult.lambda},
                             {"mu", mult.mu},
                             {"residual_norm", mult.residual_norm},
                             {"branch", branch_name(mult.branch)}};
    predicted["mean_entropy_approx_i"] = mean_entropy_feee_i(*rs.spectrum, e);
    try {
        const ApproxDistribution low = feee_approx_ii(*rs.spectrum, e);
        predicted["mean_entropy_approx_ii"] = mean_entropy_feee_ii(*rs.spectrum, e);
        predicted["approx_ii_ground_delta"] = *low.ground_delta;
    } catch (const RegimeError&) {
        predicted["mean_entropy_approx_ii"] = nullptr;
        predicted["approx_ii_ground_delta"] = nullptr;
    }
    predicted["mean_entropy_uniform_exact"] = rpse_exact_mean_entropy(layout.dim);
    predicted["entropy_rel_width_uniform"] = entropy_rel_width_rpse(layout.dim);
    json pop_means = json::object();
    for (std::size_t label : sample.populations) {
        pop_means[std::to_string(label)] = predicted_means[label - 1];
    }
    predicted["population_means"] = pop_means;
    j["predicted"] = predicted;

    std::ofstream out(dir / "summary.json");
    if (!out) {
        throw IoError("cannot open summary.json for writing");
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_approx(std::size_t dim, const SpectrumOptions& spectrum,
               const EnergyOptions& energy, const std::string& out_file) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "approx";

    const bool spectrum_given = spectrum.spins > 0 || !spectrum.spectrum_file.empty();
    if (dim > 0 && spectrum_given) {
        throw UsageError("give either --dim or a spectrum, not both");
    }
    if (dim > 0) {
        if (dim < 2) {
            throw UsageError("need at least two states");
        }
        j["dim"] = dim;
        j["uniform"] = {
            {"mean_entropy_exact", rpse_exact_mean_entropy(dim)},
            {"mean_entropy_asymptotic", mean_entropy_rpse(dim)},
            {"entropy_rel_width", entropy_rel_width_rpse(dim)},
            {"rate", static_cast<double>(dim)},
        };
        write_json_output(j, out_file);
        return 0;
    }
    if (!spectrum_given) {
        throw UsageError("give --dim or a spectrum (--spins/--spectrum-file)");
    }

    const ResolvedSpectrum rs = resolve_spectrum(spectrum);
    const double e = resolve_energy(rs, energy);
    const std::size_t n = rs.spectrum->dim();
    j["spectrum"] = spectrum_json(rs);
    j["energy"] = e;
    if (rs.spectrum->n_spins()) {
        j["energy_per_spin"] = e / *rs.spectrum->n_spins();
    } else {
        j["energy_per_spin"] = nullptr;
    }

    const LagrangeSolution mult = solve_lagrange(*rs.spectrum, e);
    j["lagrange"] = {{"lambda", mult.lambda},
                     {"mu", mult.mu},
                     {"residual_norm", mult.residual_norm},
                     {"branch", branch_name(mult.branch)}};

    const ApproxDistribution first = feee_approx_i(*rs.spectrum, e);
    j["approx_i"] = {{"rates", first.rates},
                     {"means", first.means()},
                     {"mean_entropy", mean_entropy_feee_i(*rs.spectrum, e)}};

    try {
        const ApproxDistribution second = feee_approx_ii(*rs.spectrum, e);
        const auto residuals = approx_ii_constraint_residuals(*rs.spectrum, e);
        j["approx_ii"] = {
            {"in_regime", true},
            {"ground_delta", *second.ground_delta},
            {"rates", second.rates},
            {"means", second.means()},
            {"mean_entropy_terms", mean_entropy_feee_ii(*rs.spectrum, e)},
            {"mean_entropy_constants", mean_entropy_feee_ii_from_constants(*rs.spectrum, e)},
            {"constraint_residuals", {residuals.first, residuals.second}},
        };
    } catch (const RegimeError& err) {
        j["approx_ii"] = {{"in_regime", false}, {"reason", err.what()}};
    }

    j["uniform"] = {
        {"mean_entropy_exact", rpse_exact_mean_entropy(n)},
        {"mean_entropy_asymptotic", mean_entropy_rpse(n)},
        {"entropy_rel_width", entropy_rel_width_rpse(n)},
    };
    write_json_output(j, out_file);
    return 0;
}

int cmd_validate(bool full, std::uint64_t seed) {
    std::vector<ValidationCheck> checks;
    RandomStream rng(seed);

    {
        ValidationCheck c = make_check("determinant-rank1-identity", 1e-10);
        const int instances = full ? 100 : 20;
        double worst = 0.0;
        for (int t = 0; t < instances; ++t) {
            const std::size_t n =
                2 + static_cast<std::size_t>(rng.uniform_half_open() * 7);
            SmallMatrix a(n, n);
            std::vector<double> u(n);
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < n; ++k) {
                    a.at(i, k) = 2.0 * rng.uniform_half_open() - 1.0;
                }
                a.at(i, i) += static_cast<double>(n);
                u[i] = 2.0 * rng.uniform_half_open() - 1.0;
                v[i] = 2.0 * rng.uniform_half_open() - 1.0;
            }
            SmallMatrix sum = a;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < n; ++k) {
                    sum.at(i, k) += u[i] * v[k];
                }
            }
            const double direct = determinant(sum);
            const double updated = det_rank1_update(a, u, v);
            worst = std::max(worst, std::abs(direct - updated) /
                                        std::max(1.0, std::abs(direct)));
        }
        c.measured = worst;
        c.pass = worst < c.threshold;
        c.detail = std::to_string(instances) + " instances";
        checks.push_back(c);
    }

    {
        ValidationCheck c = make_check("determinant-rankk-identity", 1e-10);
        const int instances = full ? 100 : 20;
        double worst = 0.0;
        for (int t = 0; t < instances; ++t) {
            const std::size_t n =
                2 + static_cast<std::size_t>(rng.uniform_half_open() * 7);
            const std::size_t m =
                1 + static_cast<std::size_t>(rng.uniform_half_open() * 3);
            SmallMatrix a(n, n);
            SmallMatrix u(n, m);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < n; ++k) {
                    a.at(i, k) = 2.0 * rng.uniform_half_open() - 1.0;
                }
                a.at(i, i) += static_cast<double>(n);
                for (std::size_t k = 0; k < m; ++k) {
                    u.at(i, k) = 2.0 * rng.uniform_half_open() - 1.0;
                }
            }
            SmallMatrix sum = a;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < n; ++k) {
                    double acc = 0.0;
                    for (std::size_t q = 0; q < m; ++q) {
                        acc += u.at(i, q) * u.at(k, q);
                    }
                    sum.at(i, k) += acc;
                }
            }
            const double direct = determinant(sum);
            const double updated = det_rankk_update(a, u);
            worst = std::max(worst, std::abs(direct - updated) /
                                        std::max(1.0, std::abs(direct)));
        }
        c.measured = worst;
        c.pass = worst < c.threshold;
        c.detail = std::to_string(instances) + " instances";
        checks.push_back(c);
    }

    {
        ValidationCheck c = make_check("metric-determinant-closed-form", 1e-8);
        const int points_per_target = full ? 20 : 5;
        double worst = 0.0;
        const auto targets = {
            FeeeTarget(std::make_shared<EnergySpectrum>(
                           EnergySpectrum::from_levels({0.0, 1.0, 1.0, 2.0})),
                       0.6),
            FeeeTarget(std::make_shared<EnergySpectrum>(build_spin_spectrum(
                           3, std::vector<double>{1.0, 1.3, 1.7})),
                       1.5),
        };
        for (const auto& target : targets) {
            ChainState state = init_chain(target, 0.3);
            int tested = 0;
            for (int step = 0; step < 20000 && tested < points_per_target; ++step) {
                if (step % 25 == 0) {
                    const auto p = reconstruct(state.current, target);
                    bool interior = true;
                    for (double v : p.p) {
                        interior = interior && v > 1e-4;
                    }
                    if (interior) {
                        ++tested;
                        const auto det = feee_metric_det(state.current, target);
                        worst = std::max(worst,
                                         std::abs(det.direct - det.closed_form) /
                                             std::max(1.0, std::abs(det.direct)));
                    }
                }
                mh_step(state, target, rng);
            }
        }
        c.measured = worst;
        c.pass = worst < c.threshold;
        c.detail = "four- and eight-level targets";
        checks.push_back(c);
    }

    {
        ValidationCheck c = make_check("multiplier-dense-scan", 1e-10);
        const int pairs = full ? 20 : 5;
        double worst = 0.0;
        double worst_residual = 0.0;
        for (int t = 0; t < pairs; ++t) {
            const auto spec = random_validation_spectrum(
                rng, 3 + static_cast<std::size_t>(rng.uniform_half_open() * 6));
            const double e_star = constants(spec).e_star;
            double energy = 0.0;
            do {
                energy = (0.05 + 0.9 * rng.uniform_half_open()) * spec.e_max();
            } while (std::abs(energy - e_star) < 0.05 * spec.e_max());
            const auto sol = solve_lagrange(spec, energy);
            const double z = sol.lambda / sol.mu;
            const double z_ref = scan_multiplier_ratio(spec.levels(), energy);
            worst = std::max(worst, std::abs(z - z_ref) / std::abs(z_ref));
            worst_residual = std::max(worst_residual, sol.residual_norm);
        }
        c.measured = std::max(worst, worst_residual);
        c.pass = c.measured < c.threshold;
        c.detail = std::to_string(pairs) + " spectrum/energy pairs";
        checks.push_back(c);
    }

    {
        ValidationCheck c = make_check("low-energy-closed-form", 1e-12);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const auto spec = random_validation_spectrum(
                rng, 3 + static_cast<std::size_t>(rng.uniform_half_open() * 6));
            const double e_limit =
                static_cast<double>(spec.dim() - 1) / constants(spec).s0;
            const double energy =
                (0.05 + 0.9 * rng.uniform_half_open()) * e_limit;
            const auto residuals = approx_ii_constraint_residuals(spec, energy);
            const double a = mean_entropy_feee_ii(spec, energy);
            const double b = mean_entropy_feee_ii_from_constants(spec, energy);
            worst = std::max({worst, std::abs(residuals.first),
                              std::abs(residuals.second) / spec.e_max(),
                              std::abs(a - b) / std::max(1.0, std::abs(a))});
        }
        c.measured = worst;
        c.pass = worst < c.threshold;
        c.detail = "constraints and entropy identity, 20 pairs";
        checks.push_back(c);
    }

    {
        ValidationCheck c = make_check("uniform-sampler-mean-entropy", 5.0);
        const std::size_t n = 16;
        const int draws = full ? 200000 : 20000;
        RunningStats stats;
        for (int s = 0; s < draws; ++s) {
            stats.add(shannon_entropy(sample_simplex(n, rng)));
        }
        const double se = stats.std_dev() / std::sqrt(static_cast<double>(draws));
        c.measured = std::abs(stats.mean - rpse_exact_mean_entropy(n)) / se;
        c.pass = c.measured < c.threshold;
        c.detail = "standard errors, " + std::to_string(draws) + " draws";
        checks.push_back(c);
    }

    if (full) {
        {
            ValidationCheck c = make_check("uniform-marginal-ks", 0.0052);
            const std::size_t n = 16;
            const int draws = 100000;
            std::vector<double> samples;
            samples.reserve(draws);
            for (int s = 0; s < draws; ++s) {
                samples.push_back(sample_simplex(n, rng).p[3]);
            }
            c.measured =
                ks_distance(samples, [&](double p) { return rpse_marginal_cdf(p, n); });
            c.pass = c.measured < c.threshold;
            c.detail = "population 4 of 16";
            checks.push_back(c);
        }
        {
            ValidationCheck c = make_check("reference-samplers-agreement", 0.05);
            const FeeeTarget target(std::make_shared<EnergySpectrum>(
                                        EnergySpectrum::from_levels({0.0, 1.0, 1.0, 2.0})),
                                    0.6);
            const int bins = 30;
            Histogram hist(0.0, 1.0, bins);
            feee_rejection_sample(target, 100000, rng, [&](const PopulationVector& p) {
                hist.add(p.p[0]);
            });
            const auto table = feee_marginal_quadrature(target, 0, 0.0, 1.0, bins, 800);
            c.measured = total_variation(bin_probabilities(hist), table.probability);
            c.pass = c.measured < c.threshold;
            c.detail = "quadrature vs rejection, ground population";
            checks.push_back(c);
        }
    }

    report_checks(checks);
    const bool all_pass =
        std::all_of(checks.begin(), checks.end(),
                    [](const ValidationCheck& c) { return c.pass; });
    std::printf("%s: %zu/%zu checks passed\n", all_pass ? "OK" : "FAILED",
                static_cast<std::size_t>(
                    std::count_if(checks.begin(), checks.end(),
                                  [](const ValidationCheck& c) { return c.pass; })),
                checks.size());
    return all_pass ? 0 : 2;
}

} // namespace qsecli
