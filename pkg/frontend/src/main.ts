/** Application wiring: toolbar, pointer painting, segment/post actions. */

import { ApiClient, ApiError, type Axis, type VolumeMeta } from "./api.js";
import { decodeRows } from "./rle.js";
import { buildSeedPayload, clipStroke, strokeVoxels, type UiStroke } from "./strokes.js";
import { canvasToVoxel } from "./transform.js";
import { SliceViewer, sliceCount, sliceGeometry } from "./viewer.js";

type Tool = 1 | 2 | 0; // fg, bg, off

const api = new ApiClient("");
const canvas = document.getElementById("view") as HTMLCanvasElement;
const viewer = new SliceViewer(canvas);

const state = {
  meta: null as VolumeMeta | null,
  axis: "axial" as Axis,
  index: 0,
  window: 1,
  level: 0.5,
  brush: 2,
  tool: 1 as Tool,
  opacity: 0.45,
  hasMask: false,
  painting: null as UiStroke | null,
};

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

function toast(message: string, bad = true): void {
  const el = $("toast");
  el.textContent = message;
  el.className = bad ? "toast error show" : "toast show";
  setTimeout(() => el.classList.remove("show"), 3500);
}

function setBadge(text: string, warn: boolean): void {
  const el = $("badge");
  el.textContent = text;
  el.className = warn ? "badge warn" : "badge";
}

async function refreshBase(): Promise<void> {
  const url = api.sliceUrl(state.axis, state.index, state.window, state.level);
  const response = await fetch(url);
  if (!response.ok) throw new ApiError(response.status, "slice fetch failed");
  viewer.setBase(await createImageBitmap(await response.blob()));
}

async function refreshMask(): Promise<void> {
  if (!state.hasMask) {
    viewer.setMask(null);
    return;
  }
  try {
    const rle = await api.maskSlice(state.axis, state.index);
    viewer.setMask(decodeRows(rle.rows, rle.width));
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) viewer.setMask(null);
    else throw err;
  }
}

async function refreshView(): Promise<void> {
  if (!state.meta) return;
  viewer.setGeometry(sliceGeometry(state.meta.dims, state.axis));
  viewer.overlayOpacity = state.opacity;
  await Promise.all([refreshBase(), refreshMask()]);
  viewer.render();
  $("slice-label").textContent =
    `${state.axis} ${state.index + 1}/${sliceCount(state.meta.dims, state.axis)}`;
}

async function refreshMetrics(): Promise<void> {
  const panel = $("metrics");
  try {
    const m = await api.metrics();
    panel.textContent =
      `DSC ${(m.dsc * 100).toFixed(2)} %   HD ${m.hausdorff_voxel.toFixed(2)} vox   ` +
      `vol ${m.volume_a_cm3.toFixed(2)} / ${m.volume_r_cm3.toFixed(2)} cm³`;
  } catch (err) {
    panel.textContent =
      err instanceof ApiError && err.status === 404 ? "metrics: no ground truth loaded" : "";
  }
}

function pointerVoxel(event: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) * canvas.width) / rect.width;
  const y = ((event.clientY - rect.top) * canvas.height) / rect.height;
  const { u, v } = canvasToVoxel(viewer.transform, x, y);
  return [u, v];
}

function beginStroke(event: PointerEvent): void {
  if (state.tool === 0 || !state.meta) return;
  canvas.setPointerCapture(event.pointerId);
  state.painting = {
    label: state.tool,
    axis: state.axis,
    sliceIndex: state.index,
    radius: state.brush,
    points: [pointerVoxel(event)],
  };
  echoLatest();
}

function extendStroke(event: PointerEvent): void {
  if (!state.painting) return;
  state.painting.points.push(pointerVoxel(event));
  echoLatest();
}

function echoLatest(): void {
  const stroke = state.painting;
  if (!stroke || !state.meta) return;
  const { width, height } = sliceGeometry(state.meta.dims, state.axis);
  const clipped = clipStroke(stroke.points, width, height);
  if (clipped.length === 0) return;
  viewer.paintEcho(strokeVoxels({ ...stroke, points: clipped }, width, height), stroke.label);
  viewer.render();
}

async function endStroke(): Promise<void> {
  const stroke = state.painting;
  state.painting = null;
  if (!stroke || !state.meta) return;
  const { width, height } = sliceGeometry(state.meta.dims, state.axis);
  const clipped = clipStroke(stroke.points, width, height);
  if (clipped.length === 0) return; // fully outside: no request
  try {
    const counts = await api.postSeeds(
      buildSeedPayload(state.meta.dims, [{ ...stroke, points: clipped }]),
    );
    $("seed-counts").textContent = `seeds: fg ${counts.foreground}, bg ${counts.background}`;
  } catch (err) {
    toast(err instanceof ApiError ? `seed stroke rejected: ${err.message}` : String(err));
  }
}

async function runSegmentation(): Promise<void> {
  const button = $("segment") as HTMLButtonElement;
  button.disabled = true;
  setBadge("running…", false);
  try {
    const summary = await api.segment({});
    state.hasMask = true;
    if (summary.converged) {
      setBadge(`converged in ${summary.iterations_run} it, ${summary.wall_time_ms.toFixed(0)} ms`, false);
    } else {
      setBadge(`no fixpoint after ${summary.iterations_run} iterations`, true);
    }
    await refreshView();
    await refreshMetrics();
  } catch (err) {
    setBadge("", false);
    toast(err instanceof ApiError ? `segment: ${err.message}` : String(err));
  } finally {
    button.disabled = false;
  }
}

async function runPostEdit(): Promise<void> {
  try {
    await api.postEdit(($("post-ops") as HTMLInputElement).value);
    await refreshView();
    await refreshMetrics();
  } catch (err) {
    toast(err instanceof ApiError ? `post-edit: ${err.message}` : String(err));
  }
}

function bindControls(): void {
  for (const axis of ["axial", "sagittal", "coronal"] as Axis[]) {
    $(`axis-${axis}`).addEventListener("click", () => {
      state.axis = axis;
      const count = sliceCount(state.meta!.dims, axis);
      state.index = Math.min(state.index, count - 1);
      const slider = $("slice") as HTMLInputElement;
      slider.max = String(count - 1);
      slider.value = String(state.index);
      viewer.clearEcho();
      void refreshView();
    });
  }
  $("slice").addEventListener("input", (e) => {
    state.index = Number((e.target as HTMLInputElement).value);
    viewer.clearEcho();
    void refreshView();
  });
  $("window").addEventListener("change", (e) => {
    state.window = Number((e.target as HTMLInputElement).value);
    void refreshView();
  });
  $("level").addEventListener("change", (e) => {
    state.level = Number((e.target as HTMLInputElement).value);
    void refreshView();
  });
  $("brush").addEventListener("input", (e) => {
    state.brush = Number((e.target as HTMLInputElement).value);
    $("brush-label").textContent = `brush ${state.brush}`;
  });
  $("opacity").addEventListener("input", (e) => {
    state.opacity = Number((e.target as HTMLInputElement).value) / 100;
    viewer.overlayOpacity = state.opacity;
    viewer.render();
  });
  for (const [id, tool] of [["tool-fg", 1], ["tool-bg", 2], ["tool-off", 0]] as const) {
    $(id).addEventListener("click", () => {
      state.tool = tool;
      for (const other of ["tool-fg", "tool-bg", "tool-off"]) {
        $(other).classList.toggle("active", other === id);
      }
    });
  }
  $("segment").addEventListener("click", () => void runSegmentation());
  $("post").addEventListener("click", () => void runPostEdit());
  $("clear-seeds").addEventListener("click", () => {
    void api.clearSeeds().then((counts) => {
      viewer.clearEcho();
      viewer.render();
      $("seed-counts").textContent = `seeds: fg ${counts.foreground}, bg ${counts.background}`;
    });
  });
  canvas.addEventListener("pointerdown", beginStroke);
  canvas.addEventListener("pointermove", extendStroke);
  canvas.addEventListener("pointerup", () => void endStroke());
  canvas.addEventListener("pointerleave", () => void endStroke());
}

async function start(): Promise<void> {
  try {
    const meta = await api.getVolume();
    state.meta = meta;
    state.window = meta.intensity_max - meta.intensity_min || 1;
    state.level = (meta.intensity_max + meta.intensity_min) / 2;
    state.index = Math.floor(sliceCount(meta.dims, state.axis) / 2);
    ($("window") as HTMLInputElement).value = state.window.toFixed(1);
    ($("level") as HTMLInputElement).value = state.level.toFixed(1);
    const slider = $("slice") as HTMLInputElement;
    slider.max = String(sliceCount(meta.dims, state.axis) - 1);
    slider.value = String(state.index);
    $("volume-label").textContent =
      `${meta.dims.join("×")} @ ${meta.spacing.map((s) => s.toFixed(2)).join("/")} mm`;
    bindControls();
    await refreshView();
    await refreshMetrics();
  } catch (err) {
    toast(err instanceof ApiError ? `no volume loaded (${err.status})` : String(err));
  }
}

void start();
