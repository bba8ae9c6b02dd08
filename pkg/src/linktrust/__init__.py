"""Link-trust scoring for social-graph friendships."""
