import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api';
import { FakeBackend } from './fake-backend';

describe('ApiClient', () => {
  it('round-trips the session bootstrap', async () => {
    const backend = new FakeBackend();
    const client = new ApiClient('http://test', backend.fetch);
    const spec = await client.registerSpec(backend.specDocument);
    expect(spec.viewCount).toBe(3);
    const data = await client.registerDataset('mini', 'a,b\n1,2\n');
    const session = await client.createSession(spec.specId, data.datasetId, 't');
    expect(session.sessionId).toBe('sess-1');
  });

  it('parses error envelopes into typed ApiError', async () => {
    const backend = new FakeBackend();
    const client = new ApiClient('http://test', backend.fetch);
    await client.registerSpec(backend.specDocument);
    const failure = client.postSelection('sess-1', [
      { viewName: 'Ghost', dimName: 'd', value: ['x'] }]);
    await expect(failure).rejects.toMatchObject({
      status: 422,
      code: 'unknown_view',
    });
    await expect(failure).rejects.toBeInstanceOf(ApiError);
  });

  it('propagates question 404s', async () => {
    const backend = new FakeBackend();
    const client = new ApiClient('http://test', backend.fetch);
    await expect(client.answerQuestion('sess-1', 99)).rejects.toMatchObject({
      status: 404,
      code: 'unknown_question',
    });
  });
});
