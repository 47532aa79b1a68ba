#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "sdr/cli.hpp"
#include "sdr/constants.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Forward modeling, Monte Carlo simulation, and pore-size fitting for "
                 "constant-gradient spin-echo trains (Hahn / CPMG / SDR)"};
    app.set_version_flag("--version", sdr::kVersion);
    app.require_subcommand(1);

    sdr::CliOptions opt;

    auto add_common = [&](CLI::App* sub, bool wants_walk) {
        sub->add_option("--config", opt.config_path, "configuration file")->required();
        sub->add_option("--out", opt.out_path, "output file")->required();
        if (wants_walk) {
            sub->add_option("--seed", opt.seed, "RNG seed override");
            sub->add_option("--workers", opt.workers, "worker thread override (0 = hardware)");
        }
        return sub;
    };

    CLI::App* predict = add_common(app.add_subcommand("predict", "analytic SDR scan M(x)"), false);
    predict->add_option("--spectrum-mode", opt.spectrum_mode, "single or multi:<K>");
    predict->add_flag("--cpmg", opt.cpmg_point, "single point at the CPMG limit x = TE/N");

    add_common(app.add_subcommand("simulate", "Monte Carlo decay or scan"), true);

    CLI::App* fit = add_common(app.add_subcommand("fit", "fit a measured scan"), false);
    fit->add_option("--data", opt.data_path, "input CSV (x_delay_s,signal)")->required();
    fit->add_option("--spectrum-mode", opt.spectrum_mode, "single or multi:<K>");

    CLI::App* msd = add_common(app.add_subcommand("msd", "Monte Carlo mean square displacement"),
                               true);
    msd->add_option("--points", opt.points, "number of sampled times (default 64)");
    msd->add_flag("--normalize-lc2", opt.normalize_lc2, "divide by l_c^2");

    CLI::App* spectrum =
        add_common(app.add_subcommand("spectrum", "noise spectral density S(omega)"), false);
    spectrum->add_option("--points", opt.points, "number of omega samples (default 256)");
    spectrum->add_option("--omega-span", opt.omega_span, "max omega in units of 1/tau_c");
    spectrum->add_option("--spectrum-mode", opt.spectrum_mode, "single or multi:<K>");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("predict")) return sdr::cmd_predict(opt);
        if (app.got_subcommand("simulate")) return sdr::cmd_simulate(opt);
        if (app.got_subcommand("fit")) return sdr::cmd_fit(opt);
        if (app.got_subcommand("msd")) return sdr::cmd_msd(opt);
        if (app.got_subcommand("spectrum")) return sdr::cmd_spectrum(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
