/* Copyright 2026 The glasspose Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef GLASSPOSE_GLASSPOSE_H_
#define GLASSPOSE_GLASSPOSE_H_

#include <stddef.h>

#if defined(_WIN32)
#if defined(GLASSPOSE_BUILDING_LIBRARY)
#define GP_API __declspec(dllexport)
#else
#define GP_API __declspec(dllimport)
#endif
#else
#define GP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure the message is available
 * from gp_last_error() on the calling thread until its next failing call. */
typedef enum gp_status {
  GP_OK = 0,
  GP_ERR_INVALID_ARGUMENT = 1,
  GP_ERR_IO = 2,
  GP_ERR_PARSE = 3,
  GP_ERR_MESH_NOT_CLOSED = 4,
  GP_ERR_DEGENERATE = 5,
  GP_ERR_RENDER = 6,
  GP_ERR_INTERNAL = 7
} gp_status;

typedef struct gp_mesh gp_mesh;
typedef struct gp_maps gp_maps;
typedef struct gp_image gp_image;

/* Object-to-camera transform; rotation is row-major. Units are meters. */
typedef struct gp_pose {
  double rotation[9];
  double translation[3];
} gp_pose;

typedef struct gp_intrinsics {
  double fx, fy, cx, cy;
  int width, height;
} gp_intrinsics;

typedef enum gp_tir_policy { GP_TIR_TERMINATE = 0, GP_TIR_REFLECT = 1 } gp_tir_policy;

typedef struct gp_render_config {
  double ior;
  double background_depth;
  int max_bounces;
  gp_tir_policy tir_policy;
  int threads; /* 0 = default */
} gp_render_config;

GP_API const char* gp_version(void);
GP_API const char* gp_last_error(void);
/* Releases strings returned through char** out-parameters. */
GP_API void gp_string_free(char* s);

GP_API void gp_render_config_default(gp_render_config* cfg);
GP_API void gp_pose_identity(gp_pose* pose);

/* Meshes */
GP_API gp_status gp_mesh_load(const char* path, gp_mesh** out);
GP_API gp_status gp_mesh_icosphere(int subdivisions, double radius, gp_mesh** out);
GP_API gp_status gp_mesh_box(double sx, double sy, double sz, gp_mesh** out);
GP_API gp_status gp_mesh_cylinder(double radius, double height, int segments, gp_mesh** out);
GP_API gp_status gp_mesh_info(const gp_mesh* mesh, size_t* vertices, size_t* faces,
                              double* diameter, int* closed);
GP_API gp_status gp_mesh_save_obj(const gp_mesh* mesh, const char* path);
GP_API void gp_mesh_free(gp_mesh* mesh);

/* Mattes: flow is 2 doubles per pixel (dx, dy), rho and mask 1 per pixel,
 * row-major with row 0 at the top. Pointers stay valid until gp_maps_free. */
GP_API gp_status gp_render_rfa(const gp_mesh* mesh, const gp_pose* pose,
                               const gp_intrinsics* intrinsics, const gp_render_config* cfg,
                               gp_maps** out);
GP_API gp_status gp_maps_size(const gp_maps* maps, int* width, int* height);
GP_API const double* gp_maps_flow(const gp_maps* maps);
GP_API const double* gp_maps_rho(const gp_maps* maps);
GP_API const double* gp_maps_mask(const gp_maps* maps);
GP_API gp_status gp_maps_read(const char* dir, gp_maps** out);
GP_API gp_status gp_maps_write(const gp_maps* maps, const char* dir);
GP_API void gp_maps_free(gp_maps* maps);

/* Images hold interleaved doubles in [0, 1]. */
GP_API gp_status gp_image_read_png(const char* path, gp_image** out);
GP_API gp_status gp_image_write_png(const gp_image* image, const char* path);
GP_API gp_status gp_image_size(const gp_image* image, int* width, int* height, int* channels);
GP_API const double* gp_image_data(const gp_image* image);
GP_API void gp_image_free(gp_image* image);

GP_API gp_status gp_composite(const gp_maps* maps, const gp_image* background, gp_image** out);

/* Refines `init` against an observed matte. `solver_options_json` may be
 * NULL for defaults. `result_json` (optional) receives the full result. */
GP_API gp_status gp_solve_pose(const gp_maps* observed, const gp_mesh* mesh,
                               const gp_intrinsics* intrinsics, const gp_render_config* cfg,
                               const gp_pose* init, const char* solver_options_json,
                               gp_pose* out_pose, char** result_json);

/* Command-level entry points used by the command-line tool. JSON documents
 * are passed as strings; outputs are written as files and, where noted,
 * returned through `out_json`. Relative paths inside config documents are
 * resolved against `base_dir`. */
GP_API gp_status gp_cmd_render(const char* scene_json, const char* base_dir, int threads,
                               char** out_json);
GP_API gp_status gp_cmd_composite(const char* matte_dir, const char* background,
                                  const char* out_png, int resize);
GP_API gp_status gp_cmd_gen_dataset(const char* dataset_json, const char* base_dir,
                                    const char* out_dir, int threads, char** out_json);
GP_API gp_status gp_cmd_solve(const char* request_json, char** out_json);
GP_API gp_status gp_cmd_solve_manifest(const char* manifest, const char* out_manifest,
                                       const char* solver_options_json, int threads,
                                       char** out_json);
GP_API gp_status gp_cmd_eval(const char* manifest, const char* report_json, const char* table_csv,
                             const char* eval_options_json, char** out_json);
GP_API gp_status gp_cmd_eval_losses(const char* request_json, char** out_json);
/* `passed` receives 1 when every oracle check passed. */
GP_API gp_status gp_selftest(char** out_json, int* passed);

#ifdef __cplusplus
}
#endif

#endif /* GLASSPOSE_GLASSPOSE_H_ */
