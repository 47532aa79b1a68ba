#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdr/cli.hpp"
#include "sdr/csv.hpp"
#include "sdr/decay.hpp"
#include "sdr/errors.hpp"

using namespace sdr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "sdr_cli_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << text;
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCapillaryConfig = R"(
; water-filled capillary benchmark
[geometry]
kind = cylinder
diameter_um = 5.0
d0_um2_per_ms = 2.3

[acquisition]
gradient_g_per_cm = 21.6

[sequence]
n_pulses = 8
te_ms = 80.0
x_count = 25
)";

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("ini parsing tracks sections, comments and line numbers") {
    std::istringstream in("; comment\n[alpha]\nkey = 1\n\n# another\n[beta]\nname = x y\n");
    const auto ini = IniFile::parse(in, "t.ini");
    REQUIRE(ini.sections.size() == 2);
    CHECK(ini.find("alpha", "key")->value == "1");
    CHECK(ini.find("alpha", "key")->line == 3);
    CHECK(ini.find("beta", "name")->value == "x y");

    std::istringstream bad1("[alpha\nkey = 1\n");
    CHECK_THROWS_WITH_AS(IniFile::parse(bad1, "t.ini"), doctest::Contains("t.ini:1"),
                         ConfigError);
    std::istringstream bad2("key = 1\n");
    CHECK_THROWS_WITH_AS(IniFile::parse(bad2, "t.ini"), doctest::Contains("outside"),
                         ConfigError);
    std::istringstream bad3("[a]\njust a line\n");
    CHECK_THROWS_WITH_AS(IniFile::parse(bad3, "t.ini"), doctest::Contains("t.ini:2"),
                         ConfigError);
}

TEST_CASE("config round trip is idempotent") {
    std::istringstream in(kCapillaryConfig);
    const RunConfig a = parse_config(IniFile::parse(in, "cap.ini"));
    std::istringstream in2(serialize_config(a).serialize());
    const RunConfig b = parse_config(IniFile::parse(in2, "cap2.ini"));
    CHECK(a == b);

    // and for a config exercising every optional field
    RunConfig full = a;
    full.t2_ms = 150.0;
    full.x_ms = 2.0;
    full.x_min_ms = 0.1;
    full.x_max_ms = 10.0;
    full.te_min_ms = 10.0;
    full.te_max_ms = 120.0;
    full.te_count = 12;
    full.dt_ms = 0.0147;
    full.duration_ms = 130.0;
    full.sequence_kind = "cpmg";
    std::istringstream in3(serialize_config(full).serialize());
    CHECK(parse_config(IniFile::parse(in3, "full.ini")) == full);
}

TEST_CASE("config errors carry file, line and field") {
    std::istringstream in("[geometry]\nkind = cylinder\nd0_um2_per_ms = banana\n");
    CHECK_THROWS_WITH_AS(parse_config(IniFile::parse(in, "bad.ini")),
                         doctest::Contains("bad.ini:3"), ConfigError);

    std::istringstream in2("[geometry]\nkinds = cylinder\n");
    CHECK_THROWS_WITH_AS(parse_config(IniFile::parse(in2, "bad.ini")),
                         doctest::Contains("unknown key 'kinds'"), ConfigError);

    std::istringstream in3("[geom]\nkind = cylinder\n");
    CHECK_THROWS_WITH_AS(parse_config(IniFile::parse(in3, "bad.ini")),
                         doctest::Contains("unknown section"), ConfigError);
}

TEST_CASE("csv round trip and error reporting") {
    const auto path = (temp_dir() / "t.csv").string();
    write_csv(path, {"a_s", "b"}, {{1.0, -2.5}, {3.14159265358979, 1e-300}});
    const auto table = read_csv(path);
    CHECK(table.header == std::vector<std::string>{"a_s", "b"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[1][0] == 3.14159265358979);
    CHECK(table.rows[1][1] == 1e-300);

    const auto bad = write_file("bad.csv", "x_delay_s,signal\n1.0,2.0\noops,3.0\n");
    CHECK_THROWS_WITH_AS(read_csv(bad), doctest::Contains("row 3"), CsvError);
    const auto ragged = write_file("ragged.csv", "x_delay_s,signal\n1.0\n");
    CHECK_THROWS_WITH_AS(read_csv(ragged), doctest::Contains("row 2"), CsvError);
}

TEST_CASE("spectrum mode strings") {
    CHECK(parse_spectrum_mode("single").n_components == 1);
    CHECK(parse_spectrum_mode("multi:4").n_components == 4);
    CHECK_THROWS_AS(parse_spectrum_mode("multi:0"), ConfigError);
    CHECK_THROWS_AS(parse_spectrum_mode("many"), ConfigError);
}

TEST_CASE("predict: zero gradient gives an all-ones curve") {
    std::string cfg = kCapillaryConfig;
    cfg.replace(cfg.find("21.6"), 4, "0.0");
    CliOptions opt;
    opt.config_path = write_file("quiet.ini", cfg);
    opt.out_path = (temp_dir() / "quiet.csv").string();
    REQUIRE(cmd_predict(opt) == 0);
    const auto table = read_csv(opt.out_path);
    CHECK(table.header == std::vector<std::string>{"x_delay_s", "magnetization"});
    CHECK(table.rows.size() == 25);
    for (const auto& row : table.rows) CHECK(row[1] == 1.0);
}

TEST_CASE("predict: scan endpoints match the limits and the --cpmg point") {
    CliOptions opt;
    opt.config_path = write_file("cap.ini", kCapillaryConfig);
    opt.out_path = (temp_dir() / "scan.csv").string();
    REQUIRE(cmd_predict(opt) == 0);
    const auto scan = read_csv(opt.out_path);

    CliOptions copt = opt;
    copt.cpmg_point = true;
    copt.out_path = (temp_dir() / "cpmg.csv").string();
    REQUIRE(cmd_predict(copt) == 0);
    const auto cpmg = read_csv(copt.out_path);
    REQUIRE(cpmg.rows.size() == 1);
    CHECK(cpmg.rows[0][0] == doctest::Approx(80e-3 / 8).epsilon(1e-14));
    CHECK(scan.rows.back()[1] == doctest::Approx(cpmg.rows[0][1]).epsilon(1e-12));

    // left end sits near the Hahn limit (x_min defaults to TE/1000)
    const auto geom = Geometry::cylinder(5e-6, 2.3e-9);
    AcquisitionParams acq;
    acq.gradient = 0.216;
    const double hahn =
        variance_exact(build_hahn(80e-3), build_spectrum(geom, acq)).magnetization;
    CHECK(scan.rows.front()[1] == doctest::Approx(hahn).epsilon(2e-3));

    // sidecar carries the resolved parameters
    const std::string meta = read_file(opt.out_path + ".meta");
    CHECK(meta.find("[run]") != std::string::npos);
    CHECK(meta.find("command = predict") != std::string::npos);
    CHECK(meta.find("diameter_um = 5") != std::string::npos);
}

TEST_CASE("fit command round-trips a synthetic scan") {
    // forward-generate a noiseless scan through the library, fit through the CLI
    const auto geom = Geometry::cylinder(5e-6, 2.3e-9);
    AcquisitionParams acq;
    acq.gradient = 0.216;
    const auto spec = build_spectrum(geom, acq);
    std::vector<double> xs;
    for (int i = 0; i < 20; ++i) xs.push_back(0.05e-3 * std::pow(200.0, i / 19.0));
    const auto curve = sdr_scan(8, 80e-3, spec, xs, acq);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < xs.size(); ++i)
        rows.push_back({curve.x_values[i], 0.91 * curve.signal[i]});
    const auto data_path = (temp_dir() / "fitdata.csv").string();
    write_csv(data_path, {"x_delay_s", "signal"}, rows);

    CliOptions opt;
    opt.config_path = write_file("cap.ini", kCapillaryConfig);
    opt.data_path = data_path;
    opt.out_path = (temp_dir() / "report.json").string();
    REQUIRE(cmd_fit(opt) == 0);

    const auto report = nlohmann::json::parse(read_file(opt.out_path));
    CHECK(report["converged"].get<bool>());
    CHECK(report["diameter_um"].get<double>() == doctest::Approx(5.0).epsilon(0.01));
    CHECK(report["n_points"].get<int>() == 20);
    CHECK(report["model_curve"].size() == 20);

    SUBCASE("shuffled rows are sorted with a warning") {
        std::swap(rows[3], rows[11]);
        const auto shuffled = (temp_dir() / "shuffled.csv").string();
        write_csv(shuffled, {"x_delay_s", "signal"}, rows);
        CliOptions sopt = opt;
        sopt.data_path = shuffled;
        sopt.out_path = (temp_dir() / "report2.json").string();
        REQUIRE(cmd_fit(sopt) == 0);
        const auto rep2 = nlohmann::json::parse(read_file(sopt.out_path));
        CHECK(rep2["warnings"].size() == 1);
        CHECK(rep2["diameter_um"].get<double>() ==
              doctest::Approx(report["diameter_um"].get<double>()).epsilon(1e-9));
    }
    SUBCASE("wrong header is rejected") {
        const auto badhdr = write_file("badhdr.csv", "x,signal\n1,1\n2,1\n3,1\n4,1\n5,1\n");
        CliOptions bopt = opt;
        bopt.data_path = badhdr;
        CHECK_THROWS_WITH_AS(cmd_fit(bopt), doctest::Contains("x_delay_s,signal"), CsvError);
    }
    SUBCASE("too few rows are rejected") {
        const auto tiny = write_file("tiny.csv", "x_delay_s,signal\n0.001,1.0\n0.002,0.9\n");
        CliOptions topt = opt;
        topt.data_path = tiny;
        CHECK_THROWS_AS(cmd_fit(topt), InsufficientDataError);
    }
}

TEST_CASE("simulate: data files are byte-identical across worker counts") {
    const std::string cfg = R"(
[geometry]
kind = slab
diameter_um = 5.0
d0_um2_per_ms = 2.3

[acquisition]
gradient_g_per_cm = 21.6

[sequence]
n_pulses = 4
te_ms = 4.0
kind = cpmg

[walk]
n_walkers = 600
seed = 424242
)";
    CliOptions opt;
    opt.config_path = write_file("sim.ini", cfg);
    opt.out_path = (temp_dir() / "sim1.csv").string();
    opt.workers = 1;
    REQUIRE(cmd_simulate(opt) == 0);
    CliOptions opt8 = opt;
    opt8.out_path = (temp_dir() / "sim8.csv").string();
    opt8.workers = 8;
    REQUIRE(cmd_simulate(opt8) == 0);
    CHECK(read_file(opt.out_path) == read_file(opt8.out_path));
    const auto table = read_csv(opt.out_path);
    CHECK(table.header == std::vector<std::string>{"time_s", "magnetization", "stderr"});
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0][1] > 0.0);
    CHECK(table.rows[0][1] <= 1.0);
}

TEST_CASE("simulate: free-diffusion hahn decay matches the closed form") {
    const std::string cfg = R"(
[geometry]
kind = free
d0_um2_per_ms = 2.3

[acquisition]
gradient_g_per_cm = 1.9

[sequence]
n_pulses = 1
te_ms = 40.0
kind = hahn

[walk]
n_walkers = 4000
seed = 11
)";
    CliOptions opt;
    opt.config_path = write_file("free.ini", cfg);
    opt.out_path = (temp_dir() / "free.csv").string();
    REQUIRE(cmd_simulate(opt) == 0);
    const auto table = read_csv(opt.out_path);
    REQUIRE(table.rows.size() == 1);
    const double te = 40e-3;
    const double gg = 2.675221e8 * 0.019;
    const double expected = std::exp(-gg * gg * 2.3e-9 * te * te * te / 12.0);
    CHECK(std::abs(table.rows[0][1] - expected) <= 3.0 * table.rows[0][2]);
}

TEST_CASE("simulate: x scans use the x_delay_s column") {
    const std::string cfg = R"(
[geometry]
kind = cylinder
diameter_um = 5.0
d0_um2_per_ms = 2.3

[acquisition]
gradient_g_per_cm = 21.6

[sequence]
n_pulses = 8
te_ms = 10.0
x_min_ms = 0.2
x_max_ms = 1.25
x_count = 3

[walk]
n_walkers = 300
seed = 77
)";
    CliOptions opt;
    opt.config_path = write_file("xscan.ini", cfg);
    opt.out_path = (temp_dir() / "xscan.csv").string();
    REQUIRE(cmd_simulate(opt) == 0);
    const auto table = read_csv(opt.out_path);
    CHECK(table.header == std::vector<std::string>{"x_delay_s", "magnetization", "stderr"});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0][0] == doctest::Approx(0.2e-3));
    CHECK(table.rows[2][0] == doctest::Approx(1.25e-3));
}

TEST_CASE("msd and spectrum commands write the documented schemas") {
    const std::string cfg = R"(
[geometry]
kind = cylinder
diameter_um = 5.0
d0_um2_per_ms = 2.3

[acquisition]
gradient_g_per_cm = 21.6

[walk]
n_walkers = 400
seed = 5
)";
    CliOptions opt;
    opt.config_path = write_file("msd.ini", cfg);
    opt.out_path = (temp_dir() / "msd.csv").string();
    opt.points = 12;
    REQUIRE(cmd_msd(opt) == 0);
    const auto msd = read_csv(opt.out_path);
    CHECK(msd.header == std::vector<std::string>{"t_s", "msd_m2"});
    CHECK(msd.rows.size() == 12);

    CliOptions sopt;
    sopt.config_path = opt.config_path;
    sopt.out_path = (temp_dir() / "spec.csv").string();
    sopt.points = 40;
    REQUIRE(cmd_spectrum(sopt) == 0);
    const auto spec = read_csv(sopt.out_path);
    CHECK(spec.header == std::vector<std::string>{"omega_rad_s", "s_omega_s"});
    CHECK(spec.rows.size() == 40);
    // peak value tau_c/pi at omega = 0
    const double tau = correlation_time(Geometry::cylinder(5e-6, 2.3e-9));
    CHECK(spec.rows[0][1] == doctest::Approx(tau / 3.14159265358979).epsilon(1e-9));
}

} // TEST_SUITE
