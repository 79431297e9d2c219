import { describe, expect, it } from "vitest";

import { parseSseFrame } from "../src/api.js";

describe("parseSseFrame", () => {
  it("parses a case_opened frame", () => {
    const frame = 'event: case_opened\ndata: {"case_id":"case-S1","submission_id":"S1","opened_at":2.6,"status":"pending_review","evidence":{}}';
    const event = parseSseFrame(frame);
    expect(event?.kind).toBe("case_opened");
    expect(event?.record.case_id).toBe("case-S1");
  });

  it("ignores keepalive comments", () => {
    expect(parseSseFrame(": keepalive")).toBeNull();
    expect(parseSseFrame(": connected")).toBeNull();
  });

  it("ignores unknown event kinds", () => {
    expect(parseSseFrame('event: something_else\ndata: {"x":1}')).toBeNull();
  });

  it("ignores malformed json", () => {
    expect(parseSseFrame("event: case_opened\ndata: {nope")).toBeNull();
  });
});
