/**
 * Boots a real grading service (mock provider, in-memory store) for the
 * e2e project, seeds it with the fixture corpus over plain HTTP, and
 * hands the base URL to the tests.  Torn down when the run ends.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import type { TestProject } from "vitest/node";

import {
  FIXTURE_ASSIGNMENT,
  FIXTURE_DRAFTS,
  FIXTURE_ROSTER,
} from "./fixture";

declare module "vitest" {
  interface ProvidedContext {
    baseUrl: string;
  }
}

const HOST = "127.0.0.1";
const HEALTH_ATTEMPTS = 150;
const HEALTH_INTERVAL_MS = 200;

export default async function setup(project: TestProject): Promise<() => Promise<void>> {
  const port = await freePort();
  const baseUrl = `http://${HOST}:${port}`;
  const workDir = await mkdtemp(join(tmpdir(), "redpen-ui-e2e-"));

  const logs: string[] = [];
  const child = spawn("redpen", ["serve", "--host", HOST, "--port", String(port)], {
    cwd: workDir,
    stdio: ["ignore", "pipe", "pipe"],
  });
  child.stdout.on("data", (chunk: Buffer) => logs.push(chunk.toString()));
  child.stderr.on("data", (chunk: Buffer) => logs.push(chunk.toString()));
  const exited = new Promise<void>((resolve) => {
    child.once("exit", () => resolve());
  });

  try {
    await waitForHealth(baseUrl, child, logs);
    await seedCorpus(baseUrl);
  } catch (error) {
    await stop(child, exited);
    await rm(workDir, { recursive: true, force: true });
    throw error;
  }

  project.provide("baseUrl", baseUrl);
  process.env.REDPEN_UI_BASE_URL = baseUrl;

  return async () => {
    await stop(child, exited);
    await rm(workDir, { recursive: true, force: true });
  };
}

async function seedCorpus(baseUrl: string): Promise<void> {
  await post(baseUrl, "/assignments", FIXTURE_ASSIGNMENT);
  await post(baseUrl, "/roster", { entries: FIXTURE_ROSTER });
  await post(baseUrl, "/drafts/import", { records: FIXTURE_DRAFTS });
}

async function post(baseUrl: string, path: string, body: unknown): Promise<void> {
  const response = await fetch(`${baseUrl}${path}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    throw new Error(`POST ${path} failed: ${response.status} ${await response.text()}`);
  }
}

async function waitForHealth(
  baseUrl: string,
  child: ChildProcess,
  logs: string[],
): Promise<void> {
  for (let attempt = 0; attempt < HEALTH_ATTEMPTS; attempt += 1) {
    if (child.exitCode !== null) {
      throw new Error(
        `grading service exited with code ${child.exitCode} before serving:\n${logs.join("")}`,
      );
    }
    try {
      const response = await fetch(`${baseUrl}/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not listening yet
    }
    await sleep(HEALTH_INTERVAL_MS);
  }
  throw new Error(
    `grading service did not become healthy at ${baseUrl}:\n${logs.join("")}`,
  );
}

async function stop(child: ChildProcess, exited: Promise<void>): Promise<void> {
  if (child.exitCode !== null) {
    return;
  }
  child.kill("SIGTERM");
  const timeout = sleep(5000).then(() => {
    if (child.exitCode === null) {
      child.kill("SIGKILL");
    }
  });
  await Promise.race([exited, timeout]);
  await exited;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.once("error", reject);
    server.listen(0, HOST, () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        server.close(() => reject(new Error("could not allocate a port")));
        return;
      }
      const { port } = address;
      server.close(() => resolve(port));
    });
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
