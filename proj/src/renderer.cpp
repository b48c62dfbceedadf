#include "ias/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ias/error.hpp"
#include "ias/quartic.hpp"

namespace ias {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill.r;
        rgb[i + 1] = fill.g;
        rgb[i + 2] = fill.b;
    }
}

Rgb Image::at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
}

std::string encode_ppm(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
    return out;
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    const std::string data = encode_ppm(img);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("failed writing " + path.string());
}

void Camera::validate() const {
    if (!(vertical_fov > 0.0 && vertical_fov < 180.0)) throw InvalidArgument("fov must be in (0, 180)");
    if (width < 1 || height < 1) throw InvalidArgument("image size must be at least 1x1");
    const Vec3 f = look_at - eye;
    if (!(norm(f) > 0.0)) throw InvalidArgument("eye and look_at coincide");
    if (!(norm(cross(normalized(f), up)) > 1e-9)) throw InvalidArgument("up is parallel to the view direction");
}

Vec3 Camera::ray_dir(double px, double py) const {
    const Vec3 forward = normalized(look_at - eye);
    const Vec3 right = normalized(cross(forward, up));
    const Vec3 true_up = cross(right, forward);
    const double half = std::tan(vertical_fov * 3.14159265358979323846 / 360.0);
    const double aspect = static_cast<double>(width) / height;
    const double sx = (2.0 * px / width - 1.0) * half * aspect;
    const double sy = (1.0 - 2.0 * py / height) * half;
    return normalized(forward + sx * right + sy * true_up);
}

RenderMode parse_render_mode(const std::string& name) {
    if (name == "lambert") return RenderMode::lambert;
    if (name == "primitive_id") return RenderMode::primitive_id;
    if (name == "normal_map") return RenderMode::normal_map;
    throw InvalidArgument("unknown render mode '" + name + "'");
}

namespace {

Rgb hsv(double h, double s, double v) {
    h = std::fmod(h, 360.0) / 60.0;
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    auto byte = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
    return {byte(r), byte(g), byte(b)};
}

std::array<Rgb, kMaxPrimitives> make_palette() {
    std::array<Rgb, kMaxPrimitives> p{};
    constexpr double kGoldenConjugate = 0.6180339887498949;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = hsv(std::fmod(i * kGoldenConjugate, 1.0) * 360.0, 0.65, 0.95);
    return p;
}

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); }

struct Shaded {
    double r, g, b;
};

Shaded shade_ray(const RayCaster& caster, const Camera& cam, const RenderOptions& opt, double px, double py,
                 double t_max) {
    const Vec3 dir = cam.ray_dir(px, py);
    const auto hit = caster.intersect(cam.eye, dir, t_max);
    if (!hit) return {1.0, 1.0, 1.0};
    switch (opt.mode) {
        case RenderMode::lambert: {
            const double i = lambert_intensity(hit->normal, -dir);
            return {kAlbedo[0] * i, kAlbedo[1] * i, kAlbedo[2] * i};
        }
        case RenderMode::primitive_id: {
            const Rgb c = primitive_color(hit->primitive_index);
            return {c.r / 255.0, c.g / 255.0, c.b / 255.0};
        }
        case RenderMode::normal_map:
            return {(hit->normal.x + 1.0) / 2.0, (hit->normal.y + 1.0) / 2.0, (hit->normal.z + 1.0) / 2.0};
    }
    return {1.0, 1.0, 1.0};
}

Rgb render_pixel(const RayCaster& caster, const Camera& cam, const RenderOptions& opt, int x, int y, double t_max) {
    if (!opt.supersample) {
        const Shaded s = shade_ray(caster, cam, opt, x + 0.5, y + 0.5, t_max);
        return {to_byte(s.r), to_byte(s.g), to_byte(s.b)};
    }
    Shaded acc{0, 0, 0};
    for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
            const Shaded s = shade_ray(caster, cam, opt, x + 0.25 + 0.5 * sx, y + 0.25 + 0.5 * sy, t_max);
            acc.r += s.r;
            acc.g += s.g;
            acc.b += s.b;
        }
    return {to_byte(acc.r / 4), to_byte(acc.g / 4), to_byte(acc.b / 4)};
}

double far_plane(const Camera& cam) { return norm(cam.eye) + 8.0; }

}  // namespace

Rgb primitive_color(int index) {
    static const auto palette = make_palette();
    const auto n = static_cast<int>(palette.size());
    return palette[((index % n) + n) % n];
}

double lambert_intensity(const Vec3& normal, const Vec3& to_light) {
    return 0.1 + 0.9 * std::max(0.0, dot(normal, to_light));
}

Image render(const Scene& scene, const Camera& cam, const RenderOptions& opt) {
    cam.validate();
    const RayCaster caster(scene);
    Image img(cam.width, cam.height, kBackground);
    const double t_max = far_plane(cam);
#pragma omp parallel for schedule(dynamic, 1)
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) img.set(x, y, render_pixel(caster, cam, opt, x, y, t_max));
    return img;
}

Image serial::render(const Scene& scene, const Camera& cam, const RenderOptions& opt) {
    cam.validate();
    const RayCaster caster(scene);
    Image img(cam.width, cam.height, kBackground);
    const double t_max = far_plane(cam);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) img.set(x, y, render_pixel(caster, cam, opt, x, y, t_max));
    return img;
}

Image plot_loss_curve(const LossReport& report, int width, int height) {
    Image img(width, height, kBackground);
    const int margin = 24;
    const Rgb axis{0, 0, 0};
    for (int x = margin; x < width - margin; ++x) img.set(x, height - margin, axis);
    for (int y = margin; y <= height - margin; ++y) img.set(margin, y, axis);
    if (report.history.empty()) return img;

    double lo = 1e300, hi = -1e300;
    for (const auto& r : report.history)
        for (double v : {r.total, r.sign_loss, r.normal_loss})
            if (v > 0.0) {
                lo = std::min(lo, std::log10(v));
                hi = std::max(hi, std::log10(v));
            }
    if (lo > hi) return img;
    if (hi - lo < 1e-9) hi = lo + 1.0;

    const auto n = static_cast<double>(std::max<std::size_t>(report.history.size() - 1, 1));
    auto plot = [&](auto value, Rgb color) {
        int prev_x = -1, prev_y = -1;
        for (std::size_t i = 0; i < report.history.size(); ++i) {
            const double v = value(report.history[i]);
            if (!(v > 0.0)) continue;
            const int x = margin + static_cast<int>(std::lround((width - 2 * margin) * (i / n)));
            const int y = height - margin -
                          static_cast<int>(std::lround((height - 2 * margin) * ((std::log10(v) - lo) / (hi - lo))));
            if (prev_x >= 0) {
                // Bresenham segment from the previous sample.
                int x0 = prev_x, y0 = prev_y;
                const int dx = std::abs(x - x0), sx = x0 < x ? 1 : -1;
                const int dy = -std::abs(y - y0), sy = y0 < y ? 1 : -1;
                int err = dx + dy;
                while (true) {
                    img.set(x0, y0, color);
                    if (x0 == x && y0 == y) break;
                    const int e2 = 2 * err;
                    if (e2 >= dy) { err += dy; x0 += sx; }
                    if (e2 <= dx) { err += dx; y0 += sy; }
                }
            }
            prev_x = x;
            prev_y = y;
        }
    };
    plot([](const IterationRecord& r) { return r.normal_loss; }, Rgb{200, 40, 40});
    plot([](const IterationRecord& r) { return r.sign_loss; }, Rgb{40, 80, 200});
    plot([](const IterationRecord& r) { return r.total; }, Rgb{0, 0, 0});
    return img;
}

}  // namespace ias
