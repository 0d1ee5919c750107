// quori: command-line front end for the platform model.
//
// Exit status: 0 success, 1 validation or limit error, 2 parse error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "quori/quori.hpp"

namespace fs = std::filesystem;
using namespace quori;

namespace {

PlatformConfig config_from(const std::string& path) {
    return path.empty() ? default_config() : load_config_file(path);
}

void print_row(std::initializer_list<double> values) {
    std::string row;
    for (double v : values) row += (row.empty() ? "" : ",") + text::fmt9(v);
    std::cout << row << "\n";
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file_atomic(path, content);
}

// ------------------------------------------------------------------ sim

void sim_run(const std::vector<std::string>& scenarios, const PlatformConfig& cfg,
             double duration, const fs::path& out) {
    // One thread per scenario; each run is independent.
    std::vector<std::string> reports(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    std::vector<std::thread> workers;
    for (size_t i = 0; i < scenarios.size(); ++i) {
        workers.emplace_back([&, i] {
            try {
                fs::path src(scenarios[i]);
                Scenario scn = load_scenario_file(src.string());
                RunLog log = run_scenario(scn, cfg, duration, src.stem().string());
                fs::path dir = scenarios.size() == 1 ? out : out / src.stem();
                write_run(log, dir);
                reports[i] = format_report_text(emit_report(log));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& r : reports) std::cout << r;
}

// ------------------------------------------------------------------ waist

void waist_sweep(const PlatformConfig& cfg, double theta_deg, double step_deg,
                 const std::string& out) {
    const WaistConfig& w = cfg.waist;
    require_within(w.limits, deg2rad(theta_deg));
    struct Variant {
        const char* name;
        TorsoMassModel model;
    };
    std::vector<Variant> variants = {{"uncompensated", uncompensated_model(w)},
                                     {"battery_only", battery_only_model(w)},
                                     {"compensated", compensated_model(w)}};
    std::string csv = "variant,phi_a_deg,torque_Nm\n";
    for (const auto& v : variants)
        for (const auto& s : sweep_arm_flexion(v.model, deg2rad(theta_deg), deg2rad(step_deg)))
            csv += std::string(v.name) + "," + text::fmt9(rad2deg(s.phi_a)) + "," +
                   text::fmt9(s.torque) + "\n";
    write_or_print(out, csv);
    if (out.empty() || out == "-") return;
    for (const auto& v : variants) {
        auto p = peak_holding_torque(v.model, w.limits);
        std::printf("%s peak %s N·m at theta_w=%s deg phi_a=%s deg\n", v.name,
                    text::fmt9(p.torque).c_str(), text::fmt9(rad2deg(p.theta_w)).c_str(),
                    text::fmt9(rad2deg(p.phi_a)).c_str());
    }
}

void waist_tune(const PlatformConfig& cfg, double target) {
    auto t = tune_counter_mass(battery_only_model(cfg.waist), target, cfg.waist.l_lower,
                               cfg.waist.limits);
    std::printf("counter_mass_kg,%s\npeak_Nm,%s\n", text::fmt9(t.added_mass).c_str(),
                text::fmt9(t.peak.torque).c_str());
}

// -------------------------------------------------------------------- arm

// Trace rows: dt_s,tau1_Nm,tau2_Nm,load_circ_Nm,load_abd_Nm
void arm_step(const PlatformConfig& cfg, const std::string& trace, bool calibrate,
              const std::string& out) {
    std::string doc = read_text_file(trace);
    ArmState st;
    std::string csv = "step,alpha1,alpha2,q_circ,q_abd,slip1,slip2,out_circ_Nm,out_abd_Nm,slipping\n";
    int lineno = 0, step = 0;
    bool header = false;
    for (auto raw : text::split_lines(doc)) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto f = text::split_csv(line);
        if (!header) {
            header = true;
            if (!text::parse_double(f[0])) continue;
        }
        if (f.size() != 5) throw parse_error("expected 5 columns", lineno);
        double v[5];
        for (int i = 0; i < 5; ++i) {
            auto d = text::parse_double(f[i]);
            if (!d) throw parse_error("non-numeric trace value", lineno);
            v[i] = *d;
        }
        auto r = step_dynamics(st, {v[1], v[2]}, {v[3], v[4]}, v[0], cfg.arm);
        st = r.state;
        csv += std::to_string(++step);
        for (double x : {st.alpha1, st.alpha2, st.q_circ, st.q_abd, st.slip1, st.slip2,
                         r.output.circ, r.output.abd})
            csv += "," + text::fmt9(x);
        csv += r.slips.empty() ? ",0\n" : ",1\n";
    }
    write_or_print(out, csv);
    auto est = detect_slip(st, cfg.arm);
    std::fprintf(stderr, "slip estimate circ=%s abd=%s rad flagged=%d\n",
                 text::fmt9(est.slip.circ).c_str(), text::fmt9(est.slip.abd).c_str(),
                 est.flagged);
    if (calibrate) {
        auto after = detect_slip(calibrate_boot(st, cfg.arm), cfg.arm);
        std::fprintf(stderr, "after calibration circ=%s abd=%s rad flagged=%d\n",
                     text::fmt9(after.slip.circ).c_str(), text::fmt9(after.slip.abd).c_str(),
                     after.flagged);
    }
}

// ------------------------------------------------------------------- head

void head_render(const PlatformConfig& cfg, const std::string& texture, double yaw_deg,
                 double pitch_deg, const std::string& out) {
    FaceTexture tex{read_pnm_file(texture), deg2rad(yaw_deg), deg2rad(pitch_deg)};
    write_ppm_file(out, render_face(tex, cfg.head));
}

void head_rings(const PlatformConfig& cfg, double step_deg, const std::string& out) {
    const auto& c = cfg.head;
    std::string csv = "theta_deg,rho_px,ring_pixels\n";
    int n = static_cast<int>(std::floor((c.theta_max - c.theta_top) / deg2rad(step_deg) + 1e-9));
    for (int i = 0; i <= n; ++i) {
        double th = std::min(c.theta_top + i * deg2rad(step_deg), c.theta_max);
        csv += text::fmt9(rad2deg(th)) + "," + text::fmt9(c.profile.rho(th)) + "," +
               std::to_string(ring_pixel_count(th, c)) + "\n";
    }
    write_or_print(out, csv);
    if (out.empty() || out == "-") return;
    std::printf("usable_lumens,%s\nannulus_pixels,%ld\ntop_ring,%ld\nbottom_ring,%ld\n",
                text::fmt9(usable_lumens(cfg.projector)).c_str(), annulus_pixel_count(c),
                ring_pixel_count(c.theta_top, c), ring_pixel_count(c.theta_max, c));
}

// -------------------------------------------------------------------- fov

void fov_camera(PlatformConfig cfg, double tilt_deg, double bow_deg) {
    cfg.camera.manual_tilt = deg2rad(tilt_deg);
    validate(cfg.camera);
    auto f = camera_frustum(cfg.camera, deg2rad(bow_deg), cfg.waist.limits);
    std::printf("pitch_deg,%s\nhalf_h_deg,%s\nhalf_v_deg,%s\n", text::fmt9(rad2deg(f.pitch)).c_str(),
                text::fmt9(rad2deg(f.half_h)).c_str(), text::fmt9(rad2deg(f.half_v)).c_str());
    std::printf("footprint_x_m,footprint_y_m\n");
    for (const auto& p : f.footprint)
        std::printf("%s,%s\n", text::fmt9(p.x).c_str(), text::fmt9(p.y).c_str());
}

void fov_laser(const PlatformConfig& cfg) {
    std::printf("arc,start_deg,end_deg,width_deg\n");
    int i = 0;
    for (const auto& a : laser_coverage(cfg.laser))
        std::printf("%d,%s,%s,%s\n", ++i, text::fmt9(a.start_deg).c_str(),
                    text::fmt9(a.end_deg).c_str(), text::fmt9(a.width_deg()).c_str());
}

// -------------------------------------------------------------------- bom

int bom_check_cmd(const std::string& file) {
    BomTable t = parse_bom_csv(read_text_file(file));
    int errors = 0;
    for (const auto& issue : bom_check(t)) {
        const BomLine& l = t.lines[issue.index];
        std::printf("%s: %s/%s qty %lld x %s = %s, printed %s\n",
                    issue.rounding ? "warning (rounding)" : "error", l.subsystem.c_str(),
                    l.item.c_str(), l.qty, format_cents(l.unit_cost_cents).c_str(),
                    format_cents(issue.expected_cents).c_str(),
                    format_cents(issue.printed_cents).c_str());
        errors += !issue.rounding;
    }
    std::printf("lines,%zu\ntotal_usd,%s\n", t.lines.size(), format_cents(bom_total(t)).c_str());
    if (errors) throw validation_error(std::to_string(errors) + " subtotal mismatch(es)", "bom");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quori platform model"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "platform config file")->check(CLI::ExistingFile);

    // sim run
    auto* sim = app.add_subcommand("sim", "scenario simulation")->require_subcommand(1);
    auto* sim_run_cmd = sim->add_subcommand("run", "run scenario files");
    std::vector<std::string> scenarios;
    double duration = 60.0;
    std::string out_dir = "run";
    sim_run_cmd->add_option("scenario", scenarios, "scenario CSV file(s)")->required();
    sim_run_cmd->add_option("--config", config_path, "platform config file");
    sim_run_cmd->add_option("--duration", duration, "simulated seconds");
    sim_run_cmd->add_option("--out", out_dir, "output directory");

    // base fk / ik
    auto* base = app.add_subcommand("base", "base kinematics")->require_subcommand(1);
    auto* fk = base->add_subcommand("fk", "wheel and turret rates -> torso twist");
    double wl = 0, wr = 0, wt = 0, theta_t = 0;
    fk->add_option("--wl", wl, "left wheel rad/s");
    fk->add_option("--wr", wr, "right wheel rad/s");
    fk->add_option("--wt", wt, "turret rad/s");
    fk->add_option("--theta-t", theta_t, "turret angle rad");
    auto* ik = base->add_subcommand("ik", "torso twist -> wheel and turret rates");
    double ux = 0, uy = 0, psi_dot = 0;
    ik->add_option("--ux", ux, "m/s forward");
    ik->add_option("--uy", uy, "m/s left");
    ik->add_option("--psi-dot", psi_dot, "torso rad/s");
    ik->add_option("--theta-t", theta_t, "turret angle rad");

    // waist
    auto* waist = app.add_subcommand("waist", "waist counterbalance")->require_subcommand(1);
    auto* sweep = waist->add_subcommand("sweep", "holding torque vs arm flexion");
    double theta_deg = 30.0, step_deg = 0.5;
    std::string out_file;
    sweep->add_option("--config", config_path, "platform config file");
    sweep->add_option("--theta", theta_deg, "waist angle, deg");
    sweep->add_option("--step", step_deg, "arm angle step, deg")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_file, "CSV output (default stdout)");
    auto* tune = waist->add_subcommand("tune", "counter mass for a target peak torque");
    double target = 2.0;
    tune->add_option("--target", target, "peak holding torque, N·m");

    // arm
    auto* arm = app.add_subcommand("arm", "shoulder transmission")->require_subcommand(1);
    auto* arm_step_cmd = arm->add_subcommand("step", "replay a torque trace");
    std::string trace;
    bool calibrate = false;
    arm_step_cmd->add_option("--trace", trace, "CSV dt_s,tau1_Nm,tau2_Nm,load_circ_Nm,load_abd_Nm")
        ->required();
    arm_step_cmd->add_flag("--calibrate", calibrate, "report slip after boot calibration");
    arm_step_cmd->add_option("--out", out_file, "CSV output (default stdout)");

    // head
    auto* head = app.add_subcommand("head", "projected face")->require_subcommand(1);
    auto* render = head->add_subcommand("render", "render a face texture");
    std::string texture;
    double yaw = 0, pitch = 0;
    render->add_option("--texture", texture, "equirectangular PPM/PGM")->required();
    render->add_option("--yaw", yaw, "deg");
    render->add_option("--pitch", pitch, "deg");
    render->add_option("--out", out_file, "output PPM")->required();
    auto* rings = head->add_subcommand("rings", "pixels per latitude ring");
    double ring_step = 1.0;
    rings->add_option("--step", ring_step, "deg")->check(CLI::PositiveNumber);
    rings->add_option("--out", out_file, "CSV output (default stdout)");

    // fov
    auto* fov = app.add_subcommand("fov", "sensor coverage")->require_subcommand(1);
    auto* camera = fov->add_subcommand("camera", "camera frustum and floor footprint");
    double tilt = 0, bow = 0;
    camera->add_option("--tilt", tilt, "manual tilt, deg");
    camera->add_option("--bow", bow, "waist angle, deg");
    auto* laser = fov->add_subcommand("laser", "visible laser arcs");

    // bom / power
    auto* bom = app.add_subcommand("bom", "bill of materials")->require_subcommand(1);
    auto* bom_check_sub = bom->add_subcommand("check", "validate a BOM CSV");
    std::string bom_file;
    bom_check_sub->add_option("file", bom_file)->required();
    auto* power = app.add_subcommand("power", "battery")->require_subcommand(1);
    auto* estimate = power->add_subcommand("estimate", "runtime at a constant draw");
    double draw = 0;
    estimate->add_option("--draw", draw, "W")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        PlatformConfig cfg = config_from(config_path);
        if (*sim_run_cmd) {
            sim_run(scenarios, cfg, duration, out_dir);
        } else if (*fk) {
            BaseState st;
            st.theta_t = theta_t;
            ActuatorRates r{wl, wr, wt};
            auto rep = check_limits(r, cfg.base);
            if (!rep.empty()) throw limit_error(rep);
            auto tw = forward_kinematics(r, st, cfg.base);
            print_row({tw.ux, tw.uy, tw.psi_dot});
        } else if (*ik) {
            BaseState st;
            st.theta_t = theta_t;
            auto r = inverse_kinematics({ux, uy, psi_dot}, st, cfg.base);
            print_row({r.omega_l, r.omega_r, r.omega_t});
        } else if (*sweep) {
            waist_sweep(cfg, theta_deg, step_deg, out_file);
        } else if (*tune) {
            waist_tune(cfg, target);
        } else if (*arm_step_cmd) {
            arm_step(cfg, trace, calibrate, out_file);
        } else if (*render) {
            head_render(cfg, texture, yaw, pitch, out_file);
        } else if (*rings) {
            head_rings(cfg, ring_step, out_file);
        } else if (*camera) {
            fov_camera(cfg, tilt, bow);
        } else if (*laser) {
            fov_laser(cfg);
        } else if (*bom_check_sub) {
            return bom_check_cmd(bom_file);
        } else if (*estimate) {
            double h = power_runtime(cfg.battery, draw);
            std::printf("energy_wh,%s\nruntime_h,%s\n", text::fmt9(cfg.battery.energy_wh()).c_str(),
                        text::fmt9(h).c_str());
        }
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const limit_error& e) {
        std::cerr << "limit exceeded: " << e.what() << "\n";
        return 1;
    } catch (const validation_error& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
