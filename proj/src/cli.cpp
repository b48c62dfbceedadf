#include "ias/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ias/error.hpp"
#include "ias/extractor.hpp"
#include "ias/fitter.hpp"
#include "ias/mesh.hpp"
#include "ias/metrics.hpp"
#include "ias/parallel.hpp"
#include "ias/renderer.hpp"
#include "ias/scene.hpp"

namespace ias {

namespace {

using json = nlohmann::ordered_json;

struct Globals {
    std::uint64_t seed = 0;
    std::string config;
    int threads = 0;
    bool verbose = false;
};

Vec3 parse_vec3(const std::string& text) {
    std::istringstream in(text);
    Vec3 v;
    char c1 = 0, c2 = 0;
    if (!(in >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof())
        throw InvalidArgument("expected x,y,z but got '" + text + "'");
    return v;
}

std::pair<int, int> parse_size(const std::string& text) {
    std::istringstream in(text);
    int w = 0, h = 0;
    char x = 0;
    if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || !(in >> std::ws).eof() || w <= 0 || h <= 0)
        throw InvalidArgument("expected WxH but got '" + text + "'");
    return {w, h};
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json globals_json(const Globals& g) {
    return json{{"seed", g.seed}, {"config", g.config}, {"threads", num_threads()}, {"verbose", g.verbose}};
}

void print_config(std::ostream& out, const std::string& command, const Globals& g, json fields) {
    json j;
    j["command"] = command;
    j["global"] = globals_json(g);
    j["config"] = std::move(fields);
    out << "config: " << j.dump() << '\n';
}

// A subcommand is split into flag resolution, which reports usage errors, and work,
// which reports data errors.
struct Command {
    std::function<void()> resolve;
    std::function<void()> work;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unions of constrained quartic implicit primitives: sample, fit, prune, extract, render, eval, info",
                 "ias"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--config", g.config, "Fit config file (key=value lines or JSON)");
    app.add_option("--threads", g.threads, "OpenMP worker count (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose,-v", g.verbose, "Progress output on stderr");

    std::map<std::string, Command> commands;

    // sample ----------------------------------------------------------------
    auto* sample = app.add_subcommand("sample", "Label volume and surface points of a watertight mesh");
    struct {
        std::string mesh, out;
        std::size_t volume = 100000, surface = 10000;
        bool no_normalize = false;
    } so;
    sample->add_option("--mesh", so.mesh, "Input OBJ")->required();
    sample->add_option("--out", so.out, "Output sample cache")->required();
    sample->add_option("--volume", so.volume, "Uniform volume points")->capture_default_str();
    sample->add_option("--surface", so.surface, "Surface points")->capture_default_str();
    sample->add_flag("--no-normalize", so.no_normalize, "Use mesh coordinates as given");
    commands["sample"] = {
        [&] {
            print_config(out, "sample", g,
                         json{{"mesh", so.mesh}, {"out", so.out}, {"volume", so.volume}, {"surface", so.surface},
                              {"normalize", !so.no_normalize}});
        },
        [&] {
            TriMesh mesh = load_obj(so.mesh);
            if (!so.no_normalize) {
                const NormalizedMesh nm = normalize_mesh(mesh);
                mesh = nm.mesh;
                out << "normalize: scale " << std::setprecision(17) << nm.transform.scale << " offset "
                    << vec_json(nm.transform.offset).dump() << '\n';
            }
            SampleStats stats;
            const SampleSet set = build_sample_set(mesh, so.volume, so.surface, g.seed, kDefaultDomain, &stats);
            save_samples(set, so.out);
            out << "samples: on " << set.on.size() << " inside " << set.inside.size() << " outside "
                << set.outside.size() << " parity_disagreements " << stats.disagreements << '\n';
        }};

    // fit -------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Fit a primitive union to a sample cache");
    struct {
        std::string samples, out, loss_csv, loss_plot;
        bool no_prune = false;
        std::map<std::string, std::string> overrides;
    } fo;
    FitConfig cfg;
    fit_cmd->add_option("--samples", fo.samples, "Sample cache from `sample`")->required();
    fit_cmd->add_option("--out", fo.out, "Output scene JSON")->required();
    fit_cmd->add_option("--loss-csv", fo.loss_csv, "Loss history CSV (default: <out>.loss.csv)");
    fit_cmd->add_option("--loss-plot", fo.loss_plot, "Loss curve PPM");
    fit_cmd->add_flag("--no-prune", fo.no_prune, "Keep empty primitives");
    const std::pair<const char*, const char*> fit_keys[] = {
        {"primitives", "Number of primitives M"},
        {"iters", "Adam iterations"},
        {"lr", "Adam learning rate"},
        {"lambda-on", "Weight of on-surface sign term"},
        {"lambda-in", "Weight of inside sign term"},
        {"lambda-out", "Weight of outside sign term"},
        {"lambda-n", "Weight of the normal loss"},
        {"volume-batch-fraction", "Fraction of volume points per batch"},
        {"surface-batch-fraction", "Fraction of surface points per batch"},
        {"alpha", "Closedness margin added to the quadratic form"},
        {"init-b-sigma", "Std-dev of the initial factor entries"},
    };
    for (const auto& [name, help] : fit_keys) {
        std::string key = name;
        std::replace(key.begin(), key.end(), '-', '_');
        fit_cmd->add_option_function<std::string>(
            std::string("--") + name, [&fo, key](const std::string& v) { fo.overrides[key] = v; }, help);
    }
    commands["fit"] = {
        [&] {
            if (!g.config.empty()) cfg.merge_text(read_text(g.config));
            for (const auto& [k, v] : fo.overrides) cfg.set(k, v);
            if (fo.no_prune) cfg.prune_on_finish = false;
            if (app.get_option("--seed")->count() > 0 || g.config.empty()) cfg.seed = g.seed;
            cfg.validate();
            if (fo.loss_csv.empty()) fo.loss_csv = fo.out + ".loss.csv";
            json fields{{"samples", fo.samples}, {"out", fo.out}, {"loss_csv", fo.loss_csv},
                        {"loss_plot", fo.loss_plot}};
            fields["fit"] = json::parse(cfg.to_json());
            print_config(out, "fit", g, std::move(fields));
        },
        [&] {
            const SampleSet samples = load_samples(fo.samples);
            FitProgress progress;
            if (g.verbose)
                progress = [&err](const IterationRecord& r) {
                    if (r.iter % 100 == 0)
                        err << "iter " << r.iter << " sign " << r.sign_loss << " normal " << r.normal_loss
                            << " total " << r.total << '\n';
                };
            const FitResult res = fit(samples, cfg, progress);
            save_scene(res.scene, fo.out);
            std::ofstream csv(fo.loss_csv, std::ios::binary);
            if (!csv) throw Error("cannot write '" + fo.loss_csv + "'");
            csv << res.report.to_csv();
            if (!fo.loss_plot.empty()) write_ppm(plot_loss_curve(res.report), fo.loss_plot);
            const auto& last = res.report.history.back();
            out << "fit: primitives " << res.scene.size() << " removed " << res.removed << " final_total "
                << std::setprecision(9) << last.total << '\n';
            if (res.prune_all_empty) out << "warning: every primitive was empty before pruning\n";
        }};

    // prune -----------------------------------------------------------------
    auto* prune_cmd = app.add_subcommand("prune", "Drop primitives with no interior");
    std::string prune_in, prune_out;
    prune_cmd->add_option("--scene", prune_in, "Input scene")->required();
    prune_cmd->add_option("--out", prune_out, "Output scene")->required();
    commands["prune"] = {
        [&] { print_config(out, "prune", g, json{{"scene", prune_in}, {"out", prune_out}}); },
        [&] {
            const Scene scene = load_scene(prune_in);
            const PruneResult pr = prune(scene);
            save_scene(pr.scene, prune_out);
            std::size_t grid_empty = 0;
            for (const auto& p : pr.scene.primitives()) grid_empty += grid_probe_min(p) >= 0.0 ? 1 : 0;
            out << "kept " << pr.scene.size() << " removed " << pr.removed << '\n';
            if (grid_empty > 0)
                out << "note: " << grid_empty
                    << " kept primitive(s) have no negative value on a 64^3 grid probe but a negative eigenvalue\n";
            if (pr.all_empty) out << "warning: every primitive was empty; kept the most negative one\n";
        }};

    // extract ---------------------------------------------------------------
    auto* extract_cmd = app.add_subcommand("extract", "Marching-cubes mesh of the union surface");
    struct {
        std::string scene, out;
        int res = kDefaultResolution;
        bool labels = false;
    } eo;
    extract_cmd->add_option("--scene", eo.scene, "Input scene")->required();
    extract_cmd->add_option("--out", eo.out, "Output OBJ")->required();
    extract_cmd->add_option("--res", eo.res, "Grid cells per axis")->capture_default_str();
    extract_cmd->add_flag("--labels", eo.labels, "Also write the .labels sidecar and a vertex-colored .ply next to --out");
    commands["extract"] = {
        [&] {
            if (eo.res < 8) throw InvalidArgument("--res must be at least 8");
            print_config(out, "extract", g,
                         json{{"scene", eo.scene}, {"out", eo.out}, {"res", eo.res}, {"labels", eo.labels}});
        },
        [&] {
            const Scene scene = load_scene(eo.scene);
            const TriMesh mesh = extract_mesh(scene, eo.res);
            save_obj(mesh, eo.out);
            out << "extract: vertices " << mesh.vertices.size() << " triangles " << mesh.triangles.size() << '\n';
            if (eo.labels) {
                const LabeledMesh lm = label_vertices(scene, mesh);
                std::filesystem::path base(eo.out);
                save_labels(lm, std::filesystem::path(base).replace_extension(".labels"));
                save_colored_ply(lm, std::filesystem::path(base).replace_extension(".ply"));
            }
        }};

    // render ----------------------------------------------------------------
    auto* render_cmd = app.add_subcommand("render", "Ray-trace the union to a PPM image");
    struct {
        std::string scene, out, mode = "lambert", eye = "0,0,-3", lookat = "0,0,0", up = "0,1,0", size = "256x256";
        double fov = 40.0;
        bool supersample = false;
    } ro;
    Camera cam;
    RenderOptions ropt;
    render_cmd->add_option("--scene", ro.scene, "Input scene")->required();
    render_cmd->add_option("--out", ro.out, "Output PPM")->required();
    render_cmd->add_option("--mode", ro.mode, "lambert | primitive_id | normal_map")->capture_default_str();
    render_cmd->add_option("--eye", ro.eye, "Camera position x,y,z")->capture_default_str();
    render_cmd->add_option("--lookat", ro.lookat, "Look-at point x,y,z")->capture_default_str();
    render_cmd->add_option("--up", ro.up, "Up vector x,y,z")->capture_default_str();
    render_cmd->add_option("--size", ro.size, "Image size WxH")->capture_default_str();
    render_cmd->add_option("--fov", ro.fov, "Vertical field of view in degrees")->capture_default_str();
    render_cmd->add_flag("--supersample", ro.supersample, "2x2 rays per pixel");
    commands["render"] = {
        [&] {
            ropt.mode = parse_render_mode(ro.mode);
            ropt.supersample = ro.supersample;
            cam.eye = parse_vec3(ro.eye);
            cam.look_at = parse_vec3(ro.lookat);
            cam.up = parse_vec3(ro.up);
            std::tie(cam.width, cam.height) = parse_size(ro.size);
            cam.vertical_fov = ro.fov;
            cam.validate();
            print_config(out, "render", g,
                         json{{"scene", ro.scene}, {"out", ro.out}, {"mode", ro.mode}, {"eye", vec_json(cam.eye)},
                              {"lookat", vec_json(cam.look_at)}, {"up", vec_json(cam.up)}, {"width", cam.width},
                              {"height", cam.height}, {"fov", cam.vertical_fov}, {"supersample", ro.supersample}});
        },
        [&] {
            const Scene scene = load_scene(ro.scene);
            write_ppm(render(scene, cam, ropt), ro.out);
        }};

    // eval ------------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "IoU, Chamfer and F-score against a ground-truth mesh");
    struct {
        std::string scene, mesh, out;
        bool no_normalize = false;
    } vo;
    EvalOptions eopt;
    eval_cmd->add_option("--scene", vo.scene, "Input scene")->required();
    eval_cmd->add_option("--mesh", vo.mesh, "Ground-truth OBJ")->required();
    eval_cmd->add_option("--out", vo.out, "Also write the report JSON here");
    eval_cmd->add_option("--tau", eopt.tau, "F-score threshold")->capture_default_str();
    eval_cmd->add_option("--points", eopt.n_points, "Surface points per side")->capture_default_str();
    eval_cmd->add_option("--iou-points", eopt.n_iou_points, "Volume points for IoU")->capture_default_str();
    eval_cmd->add_option("--res", eopt.resolution, "Extraction resolution")->capture_default_str();
    eval_cmd->add_flag("--no-normalize", vo.no_normalize, "Use mesh coordinates as given");
    commands["eval"] = {
        [&] {
            if (!(eopt.tau > 0.0)) throw InvalidArgument("--tau must be positive");
            if (eopt.n_points == 0 || eopt.n_iou_points == 0) throw InvalidArgument("point counts must be positive");
            if (eopt.resolution < 8) throw InvalidArgument("--res must be at least 8");
            eopt.seed = g.seed;
            print_config(out, "eval", g,
                         json{{"scene", vo.scene}, {"mesh", vo.mesh}, {"out", vo.out}, {"tau", eopt.tau},
                              {"points", eopt.n_points}, {"iou_points", eopt.n_iou_points},
                              {"res", eopt.resolution}, {"normalize", !vo.no_normalize}});
        },
        [&] {
            const Scene scene = load_scene(vo.scene);
            TriMesh gt = load_obj(vo.mesh);
            if (!vo.no_normalize) gt = normalize_mesh(gt).mesh;
            const MetricReport rep = evaluate(scene, gt, eopt);
            out << rep.to_table();
            out << rep.to_json() << '\n';
            if (!vo.out.empty()) {
                std::ofstream f(vo.out, std::ios::binary);
                if (!f) throw Error("cannot write '" + vo.out + "'");
                f << rep.to_json() << '\n';
            }
        }};

    // info ------------------------------------------------------------------
    auto* info_cmd = app.add_subcommand("info", "Per-primitive margins, scale bounds, centers and coefficients");
    std::string info_scene;
    info_cmd->add_option("--scene", info_scene, "Input scene")->required();
    commands["info"] = {
        [&] { print_config(out, "info", g, json{{"scene", info_scene}}); },
        [&] {
            const Scene scene = load_scene(info_scene);
            json j;
            j["alpha"] = scene.alpha();
            j["primitives"] = json::array();
            for (std::size_t i = 0; i < scene.size(); ++i) {
                const AssembledPrimitive& p = scene.primitive(i);
                json e;
                e["index"] = i;
                e["R"] = p.r;
                e["center"] = vec_json(p.center);
                e["closedness_margin"] = closedness_margin(p);
                e["min_eigenvalue"] = min_eigenvalue(p);
                e["empty"] = is_empty(p);
                e["coefficients"] = p.coeffs.a;
                j["primitives"].push_back(std::move(e));
            }
            out << j.dump(2) << '\n';
        }};

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    set_num_threads(g.threads);
    Command* cmd = nullptr;
    for (auto& [name, c] : commands)
        if (app.got_subcommand(name)) cmd = &c;

    try {
        cmd->resolve();
    } catch (const std::exception& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        cmd->work();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace ias
