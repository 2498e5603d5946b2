import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // The end-to-end test boots the Python service and lets it compute
    // consequences for the 17-module instance, so be generous.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
