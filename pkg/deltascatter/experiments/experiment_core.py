class Experiment(object):
    """Main experiment class, a named, configured run that produces a result

    Attributes
    ----------
    experiment_name: str
        Name used for output files
    metadata: dict
        Description of how the experiment was configured
    """

    def __init__(self, experiment_name: str = "default_experiment", **exp_kwargs):
        self.experiment_name = experiment_name
        self.exp_kwargs = exp_kwargs
        self.metadata = {"exp_kwargs": exp_kwargs}

    def run(self):
        raise NotImplementedError
