use fpna_core::Executor;

/// Scoped-thread executor: worker `w` handles indices `w, w + k, w + 2k, ...`.
pub struct Threads(pub usize);

impl Executor for Threads {
    fn workers(&self) -> usize {
        self.0
    }

    fn for_each(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        let k = self.0.max(1);
        std::thread::scope(|s| {
            for w in 0..k {
                s.spawn(move || {
                    let mut i = w;
                    while i < count {
                        task(i);
                        i += k;
                    }
                });
            }
        });
    }
}
