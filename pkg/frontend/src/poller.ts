/**
 * Interval polling with overlap suppression and a loud failure banner.
 * A failed poll never passes silently: the banner state flips until the
 * next successful round trip.
 */

export interface BannerState {
  down: boolean;
  message: string;
  failures: number;
}

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private running = false;
  banner: BannerState = { down: false, message: '', failures: 0 };

  constructor(
    private readonly tickFn: () => Promise<void>,
    private readonly onChange: () => void = () => {},
  ) {}

  async tick(): Promise<void> {
    if (this.running) return; // skip overlapping polls
    this.running = true;
    try {
      await this.tickFn();
      if (this.banner.down) {
        this.banner = { down: false, message: '', failures: 0 };
      }
    } catch (error) {
      this.banner = {
        down: true,
        message: `central unreachable: ${error instanceof Error ? error.message : String(error)} (retrying)`,
        failures: this.banner.failures + 1,
      };
    } finally {
      this.running = false;
      this.onChange();
    }
  }

  start(intervalMs: number): void {
    this.stop();
    void this.tick();
    this.timer = setInterval(() => void this.tick(), intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
