/**
 * Alarm queue state: pending-first ordering, optimistic verdicts with
 * server reconciliation, double-submit suppression, and stale-row
 * handling. All mutations here are local echoes of server state; the
 * server response always wins.
 */

import type { AlarmRow, AlarmStatus, Decision, VerdictResponse } from './types.js';

export interface QueueNotice {
  kind: 'conflict' | 'stale' | 'error';
  alarmId: string;
  message: string;
}

const STATUS_ORDER: Record<AlarmStatus, number> = {
  pending: 0,
  confirmed_attack: 1,
  false_alarm: 1,
};

export function pendingFirst(rows: AlarmRow[]): AlarmRow[] {
  return [...rows].sort((a, b) => {
    const byStatus = STATUS_ORDER[a.status] - STATUS_ORDER[b.status];
    if (byStatus !== 0) return byStatus;
    if (a.timestamp !== b.timestamp) return b.timestamp - a.timestamp;
    return a.alarm_id.localeCompare(b.alarm_id);
  });
}

export class AlarmQueueStore {
  private rows = new Map<string, AlarmRow>();
  private inflight = new Set<string>();
  private stale = new Set<string>();
  evidenceCount = 0;
  notices: QueueNotice[] = [];

  /** Replace local rows with a freshly polled listing. */
  absorbListing(rows: AlarmRow[], evidenceCount: number): void {
    const next = new Map<string, AlarmRow>();
    for (const row of rows) {
      // An in-flight optimistic row keeps its local echo until the
      // verdict call settles; everything else mirrors the server.
      const local = this.rows.get(row.alarm_id);
      next.set(row.alarm_id, this.inflight.has(row.alarm_id) && local ? local : row);
      this.stale.delete(row.alarm_id);
    }
    this.rows = next;
    this.evidenceCount = evidenceCount;
  }

  list(): AlarmRow[] {
    return pendingFirst([...this.rows.values()]);
  }

  get(alarmId: string): AlarmRow | undefined {
    return this.rows.get(alarmId);
  }

  get isEmpty(): boolean {
    return this.rows.size === 0;
  }

  pendingCount(): number {
    return this.list().filter((r) => r.status === 'pending').length;
  }

  isStale(alarmId: string): boolean {
    return this.stale.has(alarmId);
  }

  isInFlight(alarmId: string): boolean {
    return this.inflight.has(alarmId);
  }

  /** True when a verdict for this alarm may be submitted right now. */
  canSubmit(alarmId: string): boolean {
    const row = this.rows.get(alarmId);
    return row !== undefined && row.status === 'pending' && !this.inflight.has(alarmId);
  }

  /**
   * Start an optimistic verdict. Returns false (and does nothing) when a
   * submission is already in flight or the alarm is not pending, which is
   * exactly the double-click guard.
   */
  beginVerdict(alarmId: string, decision: Decision): boolean {
    if (!this.canSubmit(alarmId)) return false;
    const row = this.rows.get(alarmId)!;
    this.inflight.add(alarmId);
    this.rows.set(alarmId, { ...row, status: decision });
    return true;
  }

  /** Reconcile the optimistic echo with the server's verdict response. */
  settleVerdict(alarmId: string, response: VerdictResponse): void {
    this.inflight.delete(alarmId);
    const { evidence_count, ...row } = response;
    this.rows.set(alarmId, row);
    this.evidenceCount = evidence_count;
  }

  /**
   * The server answered 409: someone decided this alarm first. Roll the
   * optimistic echo back to pending until the refetched row lands, and
   * tell the officer what happened.
   */
  conflictVerdict(alarmId: string): void {
    this.inflight.delete(alarmId);
    const row = this.rows.get(alarmId);
    if (row) this.rows.set(alarmId, { ...row, status: 'pending' });
    this.notices.push({
      kind: 'conflict',
      alarmId,
      message: `alarm ${alarmId} was already decided elsewhere; showing the server's verdict`,
    });
  }

  /** Replace one row from a direct fetch (conflict reconciliation). */
  absorbRow(row: AlarmRow): void {
    this.rows.set(row.alarm_id, row);
    this.stale.delete(row.alarm_id);
  }

  /** A detail fetch 404'd: mark the row stale until the next listing. */
  markStale(alarmId: string): void {
    if (!this.rows.has(alarmId)) return;
    this.stale.add(alarmId);
    this.notices.push({
      kind: 'stale',
      alarmId,
      message: `alarm ${alarmId} is no longer on the server; refreshing`,
    });
  }

  failVerdict(alarmId: string, message: string): void {
    this.inflight.delete(alarmId);
    const row = this.rows.get(alarmId);
    if (row) this.rows.set(alarmId, { ...row, status: 'pending' });
    this.notices.push({ kind: 'error', alarmId, message });
  }

  drainNotices(): QueueNotice[] {
    const out = this.notices;
    this.notices = [];
    return out;
  }
}
