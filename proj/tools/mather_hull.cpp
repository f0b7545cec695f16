// mather-hull <solve|flow|lp|verify|sweep> --config <path> [--out <dir>]
//
// Exit codes: 0 success, 1 bad input, 2 numerical failure.  Errors are also
// printed to stderr as one JSON object.

#include "mather/config.hpp"
#include "mather/errors.hpp"
#include "mather/io.hpp"
#include "mather/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

using namespace mather;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& pointer, int code)
{
    json err = {{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
    if (!pointer.empty()) err["error"]["pointer"] = pointer;
    std::cerr << err.dump() << "\n";
    return code;
}

json flow_summary(const flow::OccupationRun& run, const cfg::RunConfig& c, double alpha)
{
    json seeds = json::array();
    for (const auto& r : run.runs) {
        json w = json::array();
        for (int a = 0; a < c.d; ++a) w.push_back(r.traj.omega0[a]);
        seeds.push_back({{"omega0", w},
                         {"dpp_residual", r.dpp_residual},
                         {"kink_samples", r.kink_samples},
                         {"running_cost", r.running_cost}});
    }
    json geo = io::measure_geometry(run.measure);
    geo["T"] = c.flow.T;
    geo["dt"] = c.flow.dt;
    geo["alpha"] = alpha;
    geo["seeds"] = seeds;
    geo["checkpoint_l1"] = run.checkpoint_l1;
    geo["seed_spread"] = run.seed_spread;
    geo["warnings"] = run.warnings;
    return geo;
}

int run_command(const std::string& cmd, const cfg::RunConfig& c)
{
    io::ArtifactWriter out((fs::path(c.output_dir) / cmd).string(), cmd);
    out.write_json("config.json", cfg::to_json(c));
    auto setup = pipeline::make_setup(c);
    int status = 0;

    if (cmd == "sweep") {
        auto res = pipeline::alpha_sweep(c, setup);
        out.write("sweep.csv", pipeline::sweep_csv(res));
        out.write_json("hbar.json", pipeline::sweep_json(res));
        out.finish();
        for (const auto& r : res.rows)
            if (!r.ok) std::cerr << "alpha " << r.alpha << ": " << r.error << "\n";
        if (!res.hbar.available) return fail("numeric", res.hbar.note, "", 2);
        return 0;
    }

    auto field = pipeline::solve_field(c, setup, c.solver.alpha);
    if (cmd == "solve") {
        out.write("value_field.csv", io::value_field_csv(field));
        auto side = io::value_field_sidecar(field);
        auto res = hj::residual_hj(field, setup.lag);
        auto reg = hj::regularity_report(field);
        side["hj_residual"] = {{"sup", res.sup}, {"trimmed_mean", res.trimmed_mean}};
        side["regularity"] = {{"lip_x", reg.lip_x},
                              {"lip_omega", reg.lip_omega},
                              {"osc_alpha_u", reg.osc_alpha_u},
                              {"semiconcavity", reg.semiconcavity}};
        side["v_max"] = setup.vgrid.v_max();
        side["M"] = setup.vgrid.M();
        out.write_json("value_field.json", side);
        out.finish();
        return 0;
    }

    std::optional<flow::OccupationRun> run;
    if (cmd == "flow" || lp::TraceSpec::parse(c.lp.nu, c.d).kind == lp::TraceSpec::Kind::Occupation)
        run = pipeline::run_flow(c, setup, field);
    if (cmd == "flow") {
        for (std::size_t i = 0; i < run->runs.size(); ++i)
            out.write("trajectory_" + std::to_string(i) + ".csv", io::trajectory_csv(run->runs[i].traj));
        out.write("measure.csv", io::measure_csv(run->measure));
        out.write_json("measure.json", flow_summary(*run, c, field.alpha));
        out.finish();
        return 0;
    }

    auto nu = pipeline::trace_measure(c, setup, run ? &*run : nullptr);
    auto st = pipeline::run_lp(c, setup, field, nu);
    const bool optimal = st.solution.raw.status == lp::Status::Optimal;
    if (cmd == "lp") {
        json rep = pipeline::to_json(st.report);
        rep["nu"] = c.lp.nu;
        rep["pivots"] = st.solution.raw.pivots;
        rep["phase1_pivots"] = st.solution.raw.phase1_pivots;
        rep["primal_residual"] = st.solution.raw.primal_residual;
        rep["min_reduced_cost"] = st.solution.raw.min_reduced_cost;
        rep["redundant_rows"] = st.solution.raw.redundant_rows;
        if (optimal) {
            rep["y0"] = st.solution.y0;
            rep["coeffs"] = st.solution.coeffs;
            out.write("measure.csv", io::measure_csv(st.solution.measure));
            out.write_json("measure.json", io::measure_geometry(st.solution.measure));
        } else if (st.solution.raw.violating_row >= 0) {
            rep["violating_row"] = st.solution.raw.violating_row;
        }
        out.write_json("report.json", rep);
        out.finish();
    } else {  // verify
        auto diag = pipeline::diagnose(c, setup, field, st);
        json doc = pipeline::to_json(diag);
        json checks = json::object();
        for (const char* other : {"solve", "flow", "lp", "sweep"}) {
            const fs::path dir = fs::path(c.output_dir) / other;
            if (!fs::exists(dir / "manifest.json")) continue;
            auto chk = io::verify_manifest(dir.string());
            checks[other] = {{"ok", chk.ok}, {"mismatched", chk.mismatched}, {"missing", chk.missing}};
            if (!chk.ok) status = 2;
        }
        doc["manifest_checks"] = checks;
        out.write_json("diagnostics.json", doc);
        out.finish();
        if (status) return fail("numeric", "artifact hashes do not match their manifest", "", status);
    }
    if (!optimal) return fail("numeric", "linear program " + st.report.status, "", 2);
    return status;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discounted Hamilton-Jacobi and Mather measures on a torus hull"};
    app.require_subcommand(1, 1);
    std::string config, out_dir;
    for (const char* name : {"solve", "flow", "lp", "verify", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("input", e.what(), "", 1);
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        auto c = cfg::load_config(config);
        if (!out_dir.empty()) c.output_dir = out_dir;
        return run_command(cmd, c);
    } catch (const InputError& e) {
        return fail("input", e.what(), e.pointer(), 1);
    } catch (const NumericError& e) {
        return fail("numeric", e.what(), "", 2);
    } catch (const std::exception& e) {
        return fail("numeric", e.what(), "", 2);
    }
}
