/**
 * Boots the Python segmentation service on a generated phantom so the
 * integration tests can exercise the real HTTP surface. Provides
 * `baseUrl` and `workDir` to the tests.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { TestProject } from "vitest/node";

const PORT = 8000 + Math.floor(Math.random() * 20000);

let child: ChildProcess | null = null;
let workDir = "";

export default async function setup(project: TestProject): Promise<() => void> {
  workDir = mkdtempSync(join(tmpdir(), "growcut3d-ui-"));
  const image = join(workDir, "image.nrrd");
  const truth = join(workDir, "truth.nrrd");
  execFileSync("python3", [
    "-m", "growcut3d.cli", "phantom",
    "-o", image, "--truth", truth,
    "--dims", "48", "48", "48",
    "--semi-axes", "14", "10", "10",
    "--noise-sigma", "3", "--seed", "5",
  ]);

  child = spawn(
    "python3",
    ["-m", "growcut3d.cli", "serve", "--volume", image, "--truth", truth,
     "--port", String(PORT), "--host", "127.0.0.1"],
    { stdio: "ignore" },
  );

  const baseUrl = `http://127.0.0.1:${PORT}`;
  let ready = false;
  for (let attempt = 0; attempt < 150 && !ready; attempt++) {
    try {
      const response = await fetch(`${baseUrl}/api/volume`);
      ready = response.ok;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
  if (!ready) throw new Error(`service did not come up on ${baseUrl}`);

  project.provide("baseUrl", baseUrl);
  project.provide("workDir", workDir);

  return () => {
    child?.kill("SIGTERM");
    rmSync(workDir, { recursive: true, force: true });
  };
}

declare module "vitest" {
  export interface ProvidedContext {
    baseUrl: string;
    workDir: string;
  }
}
