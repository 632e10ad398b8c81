// Spawns the real annotation service for integration tests.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

const realFetch = globalThis.fetch.bind(globalThis);

export interface CorpusRow {
  nct_id: string;
  original_category: "Yes" | "No" | "Undecided";
  dss_text: string;
  first_posted_year: number;
}

function csvField(value: string): string {
  if (/[",\n\r]/.test(value)) {
    return `"${value.replaceAll('"', '""')}"`;
  }
  return value;
}

export function writeCorpus(rows: CorpusRow[]): string {
  const dir = mkdtempSync(join(tmpdir(), "dss-ui-"));
  const path = join(dir, "corpus.csv");
  const lines = ["nct_id,original_category,dss_text,first_posted_year,manual_label,split"];
  for (const row of rows) {
    lines.push(
      [
        row.nct_id,
        row.original_category,
        csvField(row.dss_text),
        String(row.first_posted_year),
        "",
        "",
      ].join(","),
    );
  }
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
  return path;
}

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const { port } = address;
      probe.close(() => resolve(port));
    });
    probe.on("error", reject);
  });
}

export interface RunningServer {
  baseUrl: string;
  stop: () => Promise<void>;
}

export async function startServer(
  corpusPath: string,
  leaseMinutes: number,
): Promise<RunningServer> {
  const port = await freePort();
  const proc: ChildProcess = spawn(
    "python3",
    [
      "-m",
      "dss_pipeline.cli",
      "annotate-serve",
      "--corpus",
      corpusPath,
      "--port",
      String(port),
      "--lease-minutes",
      String(leaseMinutes),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early (${proc.exitCode}): ${stderr}`);
    }
    try {
      const response = await realFetch(`${baseUrl}/api/stats`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill("SIGKILL");
      throw new Error(`service did not come up in time: ${stderr}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }

  return {
    baseUrl,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once("exit", () => resolve());
        proc.kill("SIGTERM");
        setTimeout(() => proc.kill("SIGKILL"), 3_000).unref();
      }),
  };
}
