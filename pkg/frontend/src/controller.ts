/**
 * Orchestrates client calls against the two stores. Every state change
 * is an API call plus a local echo; the console computes nothing itself.
 */

import { CentralClient, HttpError } from './api.js';
import { DashboardStore } from './dashboard.js';
import { AlarmQueueStore } from './queue.js';
import type { AlarmDetail, AlarmStatus, Decision } from './types.js';

export class ConsoleController {
  constructor(
    readonly client: CentralClient,
    readonly queue: AlarmQueueStore = new AlarmQueueStore(),
    readonly dashboard: DashboardStore = new DashboardStore(),
  ) {}

  async refreshQueue(status?: AlarmStatus): Promise<void> {
    const listing = await this.client.fetchAlarms(status);
    this.queue.absorbListing(listing.alarms, listing.evidence_count);
  }

  /**
   * Submit a verdict with an optimistic echo. Returns the outcome:
   * 'submitted', 'suppressed' (double-click or not pending), or
   * 'conflict' (decided elsewhere; the server row has been re-fetched).
   */
  async decide(alarmId: string, decision: Decision): Promise<'submitted' | 'suppressed' | 'conflict'> {
    if (!this.queue.beginVerdict(alarmId, decision)) return 'suppressed';
    try {
      const response = await this.client.submitVerdict(alarmId, decision);
      this.queue.settleVerdict(alarmId, response);
      return 'submitted';
    } catch (error) {
      if (error instanceof HttpError && error.status === 409) {
        this.queue.conflictVerdict(alarmId);
        await this.reconcileRow(alarmId);
        return 'conflict';
      }
      this.queue.failVerdict(
        alarmId,
        error instanceof Error ? error.message : String(error),
      );
      throw error;
    }
  }

  /** Re-fetch one row after a conflict so the server's decision shows. */
  private async reconcileRow(alarmId: string): Promise<void> {
    try {
      const detail = await this.client.fetchAlarm(alarmId);
      this.queue.absorbRow({
        alarm_id: detail.alarm_id,
        source: detail.source,
        node_id: detail.node_id,
        timestamp: detail.timestamp,
        score: detail.score,
        model_version_used: detail.model_version_used,
        status: detail.status,
      });
    } catch (error) {
      if (error instanceof HttpError && error.status === 404) {
        this.queue.markStale(alarmId);
        await this.refreshQueue();
        return;
      }
      throw error;
    }
  }

  async openDetail(alarmId: string): Promise<AlarmDetail | null> {
    try {
      return await this.client.fetchAlarm(alarmId);
    } catch (error) {
      if (error instanceof HttpError && error.status === 404) {
        this.queue.markStale(alarmId);
        await this.refreshQueue();
        return null;
      }
      throw error;
    }
  }

  /** Kick a retrain; a 409 only flips the button state, never errors out. */
  async retrain(force = false): Promise<boolean> {
    try {
      await this.client.triggerRetrain(force);
      this.dashboard.retrainRejected = false;
      return true;
    } catch (error) {
      if (error instanceof HttpError && error.status === 409) {
        this.dashboard.retrainRejected = true;
        return false;
      }
      throw error;
    }
  }

  async refreshDashboard(): Promise<void> {
    const [metrics, nodes] = await Promise.all([
      this.client.fetchMetrics(),
      this.client.fetchNodes(),
    ]);
    this.dashboard.absorbMetrics(metrics);
    this.dashboard.absorbNodes(nodes);
    try {
      this.dashboard.absorbModel(await this.client.fetchModel());
    } catch (error) {
      if (!(error instanceof HttpError && error.status === 404)) throw error;
      this.dashboard.model = null; // not trained yet
    }
  }
}
