// erapod: batch front end for the reduction pipelines.
//
//   erapod reduce   --method era --order 10 --output-proj 20 --out run1
//   erapod compare  --method era,bpod,pod --order 4,8 --out cmp
//   erapod compare  --from run1 --out cmp
//   erapod counters --mc 200 --mo 200
//
// A --config JSON file overrides flags, flags override defaults.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erapod/experiment.hpp"

namespace {

struct Flags {
    std::string plant;
    std::string plant_config;
    std::vector<std::string> dmat;
    std::vector<std::string> methods;
    std::vector<long> orders;
    std::optional<long> mc, mo;
    std::optional<int> period;
    std::optional<long> output_proj;
    std::optional<double> adjoint_eps;
    std::optional<std::uint64_t> seed;
    std::optional<long> pseudo_modes;
    std::string out;
    std::string config;
    std::string from;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--plant", f.plant, "builtin plant: scalar, s2, plant, random, dmat");
    cmd->add_option("--plant-config", f.plant_config, "PlantConfig JSON file");
    cmd->add_option("--dmat", f.dmat, "A B C matrix files (with --plant dmat)")->expected(3);
    cmd->add_option("--method", f.methods, "era, bpod, pseudo, pod, bt-oracle")->delimiter(',');
    cmd->add_option("--order", f.orders, "reduced orders")->delimiter(',');
    cmd->add_option("--mc", f.mc, "primal snapshot count");
    cmd->add_option("--mo", f.mo, "adjoint snapshot count");
    cmd->add_option("--period", f.period, "sampling period P");
    cmd->add_option("--output-proj", f.output_proj, "number of output POD modes");
    cmd->add_option("--adjoint-eps", f.adjoint_eps, "adjoint perturbation size");
    cmd->add_option("--seed", f.seed, "seed for random plants");
    cmd->add_option("--pseudo-modes", f.pseudo_modes, "primal modes used for the pseudo-inverse");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--config", f.config, "experiment JSON; overrides flags");
}

erapod::ExperimentConfig resolve(const Flags& f) {
    using erapod::ErrorKind;
    erapod::ExperimentConfig c;
    if (!f.plant.empty()) c.plant = f.plant;
    if (!f.plant_config.empty()) c.plant_config = erapod::io::read_plant_config(f.plant_config);
    if (!f.dmat.empty()) {
        c.plant = "dmat";
        c.dmat_paths = {f.dmat[0], f.dmat[1], f.dmat[2]};
    }
    if (!f.methods.empty()) {
        c.methods.clear();
        for (const auto& name : f.methods) {
            if (name.empty()) continue;
            const auto m = erapod::parse_method(name);
            if (!m) erapod::detail::fail(ErrorKind::ConfigError, "unknown method '" + name + "'");
            c.methods.push_back(*m);
        }
    }
    for (long r : f.orders) c.orders.push_back(r);
    c.mc = f.mc;
    c.mo = f.mo;
    c.period = f.period;
    if (f.output_proj) c.output_proj = *f.output_proj;
    if (f.adjoint_eps) c.adjoint_eps = *f.adjoint_eps;
    if (f.seed) c.seed = *f.seed;
    if (f.pseudo_modes) c.pseudo_modes = *f.pseudo_modes;
    if (!f.out.empty()) c.out = f.out;
    if (!f.config.empty()) erapod::apply_config_json(c, erapod::io::read_json(f.config, ErrorKind::ConfigError));
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Snapshot-based balanced model reduction"};
    app.require_subcommand(1);
    Flags reduce_flags, compare_flags, counter_flags;

    auto* reduce = app.add_subcommand("reduce", "build reduced models");
    add_common(reduce, reduce_flags);
    auto* compare = app.add_subcommand("compare", "error, Gramian, trace and sigma reports");
    add_common(compare, compare_flags);
    compare->add_option("--from", compare_flags.from, "directory of an earlier reduce run");
    auto* counters = app.add_subcommand("counters", "block inner-product counts of both Hankel routes");
    add_common(counters, counter_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : erapod::exit_code(erapod::ErrorKind::ConfigError);
    }

    try {
        if (reduce->parsed()) {
            const erapod::ExperimentConfig c = resolve(reduce_flags);
            const auto d = erapod::cmd_reduce(c);
            std::cout << "reduce: " << d.models.size() << " model(s) written to " << c.out << "\n";
        } else if (compare->parsed()) {
            erapod::ExperimentConfig c = resolve(compare_flags);
            std::optional<std::string> from;
            if (!compare_flags.from.empty()) from = compare_flags.from;
            erapod::cmd_compare(c, from);
            std::cout << "compare: reports written to " << c.out << "\n";
        } else {
            const erapod::ExperimentConfig c = resolve(counter_flags);
            const auto report = erapod::cmd_counters(c);
            const std::string text = report.dump(2) + "\n";
            if (!counter_flags.out.empty()) erapod::io::write_text(erapod::io::fs::path(c.out) / "counters.json", text);
            std::cout << text;
        }
    } catch (const erapod::Error& e) {
        std::cerr << "erapod: " << e.what() << "\n";
        return erapod::exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "erapod: " << e.what() << "\n";
        return erapod::exit_code(erapod::ErrorKind::IoError);
    } catch (const std::exception& e) {
        std::cerr << "erapod: " << e.what() << "\n";
        return erapod::exit_code(erapod::ErrorKind::IllConditioned);
    }
    return 0;
}
