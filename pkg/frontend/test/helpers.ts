/** Shared test helpers: fixture loading and a scriptable fetch stub. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchFn } from '../src/api.js';
import type { AlarmRow } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, 'fixtures', name), 'utf-8')) as T;
}

export interface Exchange {
  method: string;
  path: string;
  status: number;
  body: unknown;
}

/** A fetch stub that pops scripted exchanges in order and records calls. */
export function scriptedFetch(script: Exchange[]): { fetchFn: FetchFn; calls: string[] } {
  const calls: string[] = [];
  const remaining = [...script];
  const fetchFn: FetchFn = async (input, init) => {
    const url = new URL(String(input));
    const method = init?.method ?? 'GET';
    const key = `${method} ${url.pathname}${url.search}`;
    calls.push(key);
    const next = remaining.shift();
    if (!next) throw new Error(`unexpected request ${key}`);
    if (next.method !== method || !`${url.pathname}${url.search}`.startsWith(next.path)) {
      throw new Error(`expected ${next.method} ${next.path}, got ${key}`);
    }
    return new Response(JSON.stringify(next.body), {
      status: next.status,
      headers: { 'content-type': 'application/json' },
    });
  };
  return { fetchFn, calls };
}

export function row(overrides: Partial<AlarmRow> = {}): AlarmRow {
  return {
    alarm_id: 'netlan-1-000001',
    source: 'netlan',
    node_id: 'netlan-1',
    timestamp: 10,
    score: 1.2,
    model_version_used: 1,
    status: 'pending',
    ...overrides,
  };
}
