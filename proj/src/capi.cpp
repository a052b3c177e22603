#include "geomq.h"

#include <cstring>
#include <new>
#include <string>

#include "chart.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "potentials.hpp"
#include "report.hpp"

namespace {

thread_local std::string g_last_error;

geomq_status to_c_status(geomq::Status s) { return geomq_status(int(s)); }

template <typename Fn>
geomq_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return GEOMQ_OK;
    } catch (const geomq::Error& e) {
        g_last_error = e.what();
        return to_c_status(e.status());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return GEOMQ_ALLOC_ERROR;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return GEOMQ_INTERNAL_ERROR;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

struct geomq_chart {
    geomq::Chart impl;
};

extern "C" {

const char* geomq_version(void) { return geomq::kVersion; }

const char* geomq_status_name(geomq_status status) {
    return geomq::status_name(geomq::Status(int(status)));
}

const char* geomq_last_error(void) { return g_last_error.c_str(); }

geomq_status geomq_chart_create(const char* spec, geomq_chart** chart_out) {
    if (!spec || !chart_out) {
        g_last_error = "null argument";
        return GEOMQ_INVALID_ARGUMENT;
    }
    *chart_out = nullptr;
    return guarded([&] {
        auto* handle = new geomq_chart{geomq::parse_chart_spec(spec)};
        *chart_out = handle;
    });
}

void geomq_chart_free(geomq_chart* chart) { delete chart; }

int geomq_chart_dim(const geomq_chart* chart) { return chart ? chart->impl.m : -1; }

int geomq_chart_ambient(const geomq_chart* chart) { return chart ? chart->impl.n : -1; }

geomq_status geomq_chart_point(const geomq_chart* chart, const double* u, double* x_out) {
    if (!chart || !u || !x_out) {
        g_last_error = "null argument";
        return GEOMQ_INVALID_ARGUMENT;
    }
    return guarded([&] {
        geomq::Vec uv = Eigen::Map<const geomq::Vec>(u, chart->impl.m);
        geomq::Vec x = chart->impl.map(uv);
        Eigen::Map<geomq::Vec>(x_out, x.size()) = x;
    });
}

geomq_status geomq_principal_curvatures(const geomq_chart* chart, const double* u, double* k_out) {
    if (!chart || !u || !k_out) {
        g_last_error = "null argument";
        return GEOMQ_INVALID_ARGUMENT;
    }
    return guarded([&] {
        geomq::Vec uv = Eigen::Map<const geomq::Vec>(u, chart->impl.m);
        geomq::CurvatureData d = geomq::curvature_forms(chart->impl, uv);
        if (d.principal.empty())
            geomq::fail(geomq::Status::InvalidArgument,
                        "principal curvatures need a codimension-1 chart");
        for (size_t i = 0; i < d.principal.size(); ++i) k_out[i] = d.principal[i];
    });
}

geomq_status geomq_quantum_potential(const geomq_chart* chart, const double* u, double* vq_out) {
    if (!chart || !u || !vq_out) {
        g_last_error = "null argument";
        return GEOMQ_INVALID_ARGUMENT;
    }
    return guarded([&] {
        geomq::Vec uv = Eigen::Map<const geomq::Vec>(u, chart->impl.m);
        geomq::CurvatureData d = geomq::curvature_forms(chart->impl, uv);
        *vq_out = geomq::vq_general_invariant(d.forms);
    });
}

geomq_status geomq_run(const char* config_json, char** output_out, int* pass_out) {
    if (!config_json || !output_out) {
        g_last_error = "null argument";
        return GEOMQ_INVALID_ARGUMENT;
    }
    *output_out = nullptr;
    if (pass_out) *pass_out = 0;
    return guarded([&] {
        geomq::Json cfg = geomq::parse_config(config_json);
        geomq::Report rep = geomq::run_config(cfg);
        std::string rendered = cfg.at("format").get<std::string>() == "csv"
                                   ? rep.to_csv()
                                   : rep.to_json().dump(2) + "\n";
        std::string out_path = cfg.at("out").get<std::string>();
        if (!out_path.empty()) geomq::write_atomic(out_path, rendered);
        *output_out = copy_string(rendered);
        if (pass_out) *pass_out = rep.pass() ? 1 : 0;
    });
}

void geomq_string_free(char* s) { delete[] s; }

} // extern "C"
