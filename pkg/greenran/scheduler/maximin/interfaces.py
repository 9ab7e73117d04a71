# -*- coding: utf-8 -*-
from zope.interface import Attribute, Interface


class IScheduler(Interface):
    """ Downlink scheduler Interface """

    name = Attribute("Registry name of the scheduler")

    def __init__(self, params):
        """
        Initialize scheduler

        :param SystemParams params: Scenario parameters
        """

    def run_slot(self, state):
        """
        Allocate one scheduling period

        :param SchedulerState state: Battery, multipliers, fading and random streams of the run
        :return: Tuple (SlotResult, next SchedulerState)
        :rtype: tuple
        """

    def multipliers(self, state):
        """
        Per-user multipliers for the metrics log

        :param SchedulerState state: State after a slot
        :return: Tuple (lambda, mu) of arrays, zeros when the scheduler has none
        :rtype: tuple
        """


class ISweepWorker(Interface):
    """ Sweep Worker Interface based on `gevent.greenlet.Greenlet` """
